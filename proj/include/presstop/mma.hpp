#pragma once

#include <Eigen/Dense>

namespace presstop {

// Method of moving asymptotes, specialized to box-constrained minimization
// with a small number of inequality constraints. Each update() builds the
// separable convex approximation around the current point, then solves its
// dual with a safeguarded Newton iteration (the primal minimizer is closed
// form for fixed multipliers).
//
// Gradients are normalized internally by their max-norms, which makes the
// step invariant under positive rescaling of the objective or constraints.
class MmaOptimizer {
public:
    struct Options {
        double asyinit = 0.5;
        double asyincr = 1.2;
        double asydecr = 0.7;
        double albefa = 0.1;
        double raa0 = 1e-5;
        double a0 = 1.0;
        double a = 0.0;     // per-constraint, scalar here
        double c = 1000.0;
        double d = 0.0;
        int max_dual_iter = 200;
        double dual_tol = 1e-9;
    };

    MmaOptimizer(int num_vars, int num_constraints);
    MmaOptimizer(int num_vars, int num_constraints, Options opts);

    // One design update. f0val/df0dx describe the objective, fval/dfdx the
    // constraints (dfdx is num_constraints x num_vars). xmin/xmax are the
    // current box (already clipped by any move limit). Returns the new point;
    // internal asymptote state advances. Throws OptimizerError if the dual
    // Newton iteration fails to converge.
    Eigen::VectorXd update(const Eigen::VectorXd& x, double f0val,
                           const Eigen::VectorXd& df0dx,
                           const Eigen::VectorXd& fval,
                           const Eigen::MatrixXd& dfdx,
                           const Eigen::VectorXd& xmin,
                           const Eigen::VectorXd& xmax);

    // Forget iteration history (asymptotes restart from asyinit spacing).
    void reset();

    int iteration() const { return iter_; }
    const Eigen::VectorXd& low() const { return low_; }
    const Eigen::VectorXd& upp() const { return upp_; }
    const Eigen::VectorXd& lambda() const { return lambda_; }
    double kkt_residual() const { return kkt_; }

private:
    int n_, m_;
    Options opts_;
    int iter_ = 0;
    Eigen::VectorXd xold1_, xold2_;
    Eigen::VectorXd low_, upp_;
    Eigen::VectorXd lambda_;
    double kkt_ = 0.0;
};

} // namespace presstop
