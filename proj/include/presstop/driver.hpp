#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

#include "presstop/filters.hpp"
#include "presstop/problems.hpp"

namespace presstop {

struct RunConfig {
    double volfrac = 0.3;
    double penal = 3.0;
    double rmin = 2.4;
    double etaf = 0.2;
    double betaf = 8.0;
    bool lst = true;
    int maxit = 100;
    std::optional<ProjectionParams> projection;  // Heaviside continuation
    double change_tol = 0.01;
    double move = 0.1;  // MMA move limit per iteration

    static RunConfig from_defaults(const ProblemDefaults& d) {
        RunConfig cfg;
        cfg.volfrac = d.volfrac;
        cfg.penal = d.penal;
        cfg.rmin = d.rmin;
        cfg.etaf = d.etaf;
        cfg.betaf = d.betaf;
        cfg.lst = d.lst;
        cfg.maxit = d.maxit;
        return cfg;
    }

    void validate() const;  // throws std::invalid_argument
};

struct OptResult {
    Eigen::VectorXd xphys;        // final physical densities
    Eigen::VectorXd pressure;     // final nodal pressures
    Eigen::VectorXd displacement; // final nodal displacements
    std::vector<double> compliance_history;
    std::vector<double> volfrac_history;
    std::vector<double> change_history;
    int iterations = 0;
    bool converged = false;  // change dropped to tolerance before maxit
    double compliance = 0.0;
    // Final compliance rescaled so iteration 1 scores 1000, i.e.
    // 1000 * compliance / compliance_history.front(). With unit modulus and
    // unit inlet pressure the raw values run to 1e5 and scale with mesh
    // size; this is the convention the built-in problems' reference values
    // are quoted in, so it is the number to compare across runs.
    double compliance_scaled = 0.0;
    double mnd_percent = 0.0;
    double volume_constraint = 0.0;
};

// Starting design: active elements at the value that meets the volume budget
// once the frozen regions are accounted for, solid regions at 1, void at 0.
// Throws std::invalid_argument if the budget is infeasible.
Eigen::VectorXd initialize(const ProblemSpec& spec, const RunConfig& cfg);

// Per-iteration observer; return value ignored.
using IterationCallback =
    std::function<void(int iter, double compliance, double volfrac,
                       double change, double beta)>;

OptResult optimize(const ProblemSpec& spec, const RunConfig& cfg,
                   const IterationCallback& on_iteration = nullptr);

// Flow-only run of a validation field: solves the pressure state on the
// frozen design and returns the net consistent load (MFx, MFy).
std::pair<double, double> net_force(const ProblemSpec& spec,
                                    const RunConfig& cfg,
                                    bool drainage = true);

// Write convergence.csv, density.csv, density.pgm, pressure.csv and
// result.json into out_dir. Throws IoError on failure.
void export_results(const OptResult& result, const ProblemSpec& spec,
                    const RunConfig& cfg, const std::string& out_dir);

} // namespace presstop
