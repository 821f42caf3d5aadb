#pragma once

#include <Eigen/Dense>

namespace presstop {

// Cone-kernel density filter over the element grid with zero padding outside
// the domain. Element fields are flat vectors in column-major grid order
// (index = col*nely + row, row counted from the top).
class DensityFilter {
public:
    DensityFilter(int nelx, int nely, double rmin);

    // Filtered field: correlate with the cone kernel, divide by the per-cell
    // weight sum.
    Eigen::VectorXd apply(const Eigen::VectorXd& field) const;

    // Adjoint chain rule for sensitivities: correlate(g / divisor, kernel).
    // divisor is the weight-sum grid for plain filtering, or weight-sum
    // divided by the projection derivative when projection is active.
    Eigen::VectorXd backproject(const Eigen::VectorXd& sens,
                                const Eigen::VectorXd& divisor) const;

    // Per-element kernel weight sums (the normalization grid).
    const Eigen::VectorXd& weight_sum() const { return hs_; }
    double rmin() const { return rmin_; }

private:
    Eigen::VectorXd correlate(const Eigen::VectorXd& field) const;

    int nelx_, nely_, reach_;
    double rmin_;
    Eigen::MatrixXd kernel_;  // (2*reach+1) x (2*reach+1) cone weights
    Eigen::VectorXd hs_;
};

// Heaviside projection of filtered densities toward 0/1 with threshold eta
// (0.5 in the optimization loop) and steepness beta.
Eigen::VectorXd project(const Eigen::VectorXd& xtilde, double eta, double beta);
Eigen::VectorXd project_derivative(const Eigen::VectorXd& xtilde, double eta,
                                   double beta);

struct ProjectionParams {
    double beta = 1.0;
    double betamax = 256.0;
    double eta = 0.5;
    int period = 25;  // iterations between doublings
};

// Continuation schedule: double beta when the iteration count hits a multiple
// of the period and beta has not yet passed betamax. Mirrors the reference
// guard, so the terminal value can be 2*betamax.
ProjectionParams continuation_step(int loop, ProjectionParams params);

// Percentage of intermediate density: 100 * sum(4*x*(1-x)) / nel.
double grayness_measure(const Eigen::VectorXd& xphys);

} // namespace presstop
