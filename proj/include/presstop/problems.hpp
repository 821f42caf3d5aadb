#pragma once

#include <string>
#include <vector>

#include "presstop/flow.hpp"
#include "presstop/mesh.hpp"
#include "presstop/structure.hpp"

namespace presstop {

// Per-problem default optimization parameters (the published calls).
struct ProblemDefaults {
    int nelx = 200;
    int nely = 100;
    double volfrac = 0.3;
    double penal = 3.0;
    double rmin = 2.4;
    double etaf = 0.2;
    double betaf = 8.0;
    bool lst = true;
    int maxit = 100;
};

// A benchmark configuration: mesh size, pressure and displacement boundary
// conditions, and the non-design element sets (solid stays at 1, void at 0).
struct ProblemSpec {
    std::string name;
    Mesh mesh;
    PressureBc pressure_bc;
    StructuralBc structural_bc;
    std::vector<int> nds;  // non-design solid elements
    std::vector<int> ndv;  // non-design void elements
    double pin = 1.0;
    ProblemDefaults defaults;

    ProblemSpec(std::string name_, int nelx, int nely)
        : name(std::move(name_)),
          mesh(nelx, nely),
          pressure_bc(mesh.num_nodes()),
          structural_bc(mesh.num_udofs()) {}
};

// Build one of the named benchmarks at the given mesh size (pass 0,0 to take
// the problem's published dimensions). Throws std::invalid_argument for an
// unknown name or dimensions the problem's index arithmetic cannot slice.
ProblemSpec make_problem(const std::string& name, int nelx = 0, int nely = 0);

const std::vector<std::string>& problem_names();

// Assemble a custom problem from config-style directives. Each entry is one
// key=value pair using edge names and fractional spans, e.g.
//   pressure.bottom = pin        pressure.top[0:0.25] = 0
//   fix.left = xy                fix.bottom[0.4:0.6] = y
//   solid.rect = 0.1,0.2,0.3,0.4 (x0,y0,x1,y1 fractions, y up from bottom)
//   void.rect  = ...
// Unassigned boundary pressure nodes stay free.
ProblemSpec make_custom_problem(int nelx, int nely,
                                const std::vector<std::pair<std::string, std::string>>& directives,
                                double pin = 1.0);

} // namespace presstop
