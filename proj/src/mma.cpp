#include "presstop/mma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "presstop/errors.hpp"

namespace presstop {

namespace {

// Separable subproblem data after normalization: minimize over alfa<=x<=beta
//   sum_j [ p0_j/(upp_j-x_j) + q0_j/(x_j-low_j) ]
// subject to, for each constraint i,
//   sum_j [ P_ij/(upp_j-x_j) + Q_ij/(x_j-low_j) ] <= b_i  (relaxed by y_i>=0
//   at linear cost c per unit).
struct Subproblem {
    Eigen::VectorXd low, upp, alfa, beta;
    Eigen::VectorXd p0, q0;
    Eigen::MatrixXd pmat, qmat;  // m x n
    Eigen::VectorXd b;
};

// Primal minimizer for fixed multipliers, clamped to [alfa, beta].
Eigen::VectorXd primal_point(const Subproblem& s, const Eigen::VectorXd& lam) {
    const Eigen::ArrayXd pl =
        (s.p0 + s.pmat.transpose() * lam).array().max(0.0);
    const Eigen::ArrayXd ql =
        (s.q0 + s.qmat.transpose() * lam).array().max(0.0);
    const Eigen::ArrayXd sp = pl.sqrt();
    const Eigen::ArrayXd sq = ql.sqrt();
    Eigen::ArrayXd x =
        (sp * s.low.array() + sq * s.upp.array()) / (sp + sq).max(1e-300);
    return x.max(s.alfa.array()).min(s.beta.array()).matrix();
}

// Dual gradient: approximated constraint values at the primal point, minus b.
Eigen::VectorXd dual_gradient(const Subproblem& s, const Eigen::VectorXd& x) {
    const Eigen::ArrayXd uxinv = 1.0 / (s.upp - x).array();
    const Eigen::ArrayXd xlinv = 1.0 / (x - s.low).array();
    return s.pmat * uxinv.matrix() + s.qmat * xlinv.matrix() - s.b;
}

// Dual Hessian restricted to components strictly inside (alfa, beta).
Eigen::MatrixXd dual_hessian(const Subproblem& s, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lam) {
    const int m = static_cast<int>(s.pmat.rows());
    const int n = static_cast<int>(x.size());
    const Eigen::ArrayXd pl =
        (s.p0 + s.pmat.transpose() * lam).array().max(0.0);
    const Eigen::ArrayXd ql =
        (s.q0 + s.qmat.transpose() * lam).array().max(0.0);

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < n; ++j) {
        if (x[j] <= s.alfa[j] || x[j] >= s.beta[j]) continue;
        const double ux = s.upp[j] - x[j];
        const double xl = x[j] - s.low[j];
        const double curv =
            2.0 * pl[j] / (ux * ux * ux) + 2.0 * ql[j] / (xl * xl * xl);
        if (curv <= 0.0) continue;
        const Eigen::VectorXd g =
            s.pmat.col(j) / (ux * ux) - s.qmat.col(j) / (xl * xl);
        h.noalias() -= (g * g.transpose()) / curv;
    }
    return h;
}

double kkt_violation(const Eigen::VectorXd& lam, const Eigen::VectorXd& grad,
                     double c) {
    double res = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        double v;
        if (lam[i] <= 0.0)
            v = std::max(0.0, grad[i]);
        else if (lam[i] >= c)
            v = std::max(0.0, -grad[i]);
        else
            v = std::abs(grad[i]);
        res = std::max(res, v);
    }
    return res;
}

// Single-constraint dual: the gradient is strictly decreasing in lambda, so a
// bracketed Newton/bisection hybrid converges to machine precision.
double solve_dual_scalar(const Subproblem& s, double c, int max_iter,
                         double tol, double& kkt_out) {
    auto grad_at = [&](double lam) {
        const Eigen::VectorXd lv = Eigen::VectorXd::Constant(1, lam);
        return dual_gradient(s, primal_point(s, lv))[0];
    };

    double g0 = grad_at(0.0);
    if (g0 <= 0.0) {
        kkt_out = 0.0;
        return 0.0;
    }
    double gc = grad_at(c);
    if (gc >= 0.0) {
        kkt_out = 0.0;
        return c;
    }

    double lo = 0.0, hi = c, glo = g0;
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd lv = Eigen::VectorXd::Constant(1, lam);
        const Eigen::VectorXd x = primal_point(s, lv);
        const double g = dual_gradient(s, x)[0];
        if (std::abs(g) <= tol) {
            kkt_out = std::abs(g);
            return lam;
        }
        if (g > 0.0) {
            lo = lam;
            glo = g;
        } else {
            hi = lam;
        }
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, lam)) {
            // Bracket at machine width: dual solved as exactly as doubles
            // allow even if |g| sits above the nominal tolerance.
            kkt_out = std::abs(g);
            return lam;
        }
        const double h = dual_hessian(s, x, lv)(0, 0);
        double next = 0.5 * (lo + hi);
        if (h < 0.0) {
            const double newton = lam - g / h;
            if (newton > lo && newton < hi) next = newton;
        }
        lam = next;
    }
    kkt_out = std::abs(grad_at(lam));
    throw OptimizerError("MMA dual iteration did not converge", kkt_out);
}

// General-m dual: projected Newton with backtracking on the KKT violation.
Eigen::VectorXd solve_dual(const Subproblem& s, double c, int max_iter,
                           double tol, double& kkt_out) {
    const int m = static_cast<int>(s.pmat.rows());
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd x = primal_point(s, lam);
    Eigen::VectorXd grad = dual_gradient(s, x);
    double res = kkt_violation(lam, grad, c);

    for (int it = 0; it < max_iter && res > tol; ++it) {
        Eigen::MatrixXd h = dual_hessian(s, x, lam);
        const double shift =
            1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()) + 1e-30;
        h.diagonal().array() -= shift;
        const Eigen::VectorXd step = (-h).ldlt().solve(grad);

        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 60; ++ls) {
            Eigen::VectorXd trial =
                (lam + t * step).cwiseMax(0.0).cwiseMin(c);
            Eigen::VectorXd xt = primal_point(s, trial);
            Eigen::VectorXd gt = dual_gradient(s, xt);
            const double rt = kkt_violation(trial, gt, c);
            if (rt < res || (trial - lam).norm() == 0.0) {
                lam = trial;
                x = xt;
                grad = gt;
                improved = rt < res;
                res = rt;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    kkt_out = res;
    if (res > tol)
        throw OptimizerError("MMA dual iteration did not converge", res);
    return lam;
}

} // namespace

MmaOptimizer::MmaOptimizer(int num_vars, int num_constraints)
    : MmaOptimizer(num_vars, num_constraints, Options{}) {}

MmaOptimizer::MmaOptimizer(int num_vars, int num_constraints, Options opts)
    : n_(num_vars), m_(num_constraints), opts_(opts) {
    if (num_vars < 1 || num_constraints < 1)
        throw std::invalid_argument("MMA needs at least one variable and one "
                                    "constraint");
    reset();
}

void MmaOptimizer::reset() {
    iter_ = 0;
    xold1_.resize(0);
    xold2_.resize(0);
    low_.resize(0);
    upp_.resize(0);
    lambda_ = Eigen::VectorXd::Zero(m_);
    kkt_ = 0.0;
}

Eigen::VectorXd MmaOptimizer::update(const Eigen::VectorXd& x, double f0val,
                                     const Eigen::VectorXd& df0dx,
                                     const Eigen::VectorXd& fval,
                                     const Eigen::MatrixXd& dfdx,
                                     const Eigen::VectorXd& xmin,
                                     const Eigen::VectorXd& xmax) {
    if (x.size() != n_ || df0dx.size() != n_ || xmin.size() != n_ ||
        xmax.size() != n_ || fval.size() != m_ || dfdx.rows() != m_ ||
        dfdx.cols() != n_)
        throw std::invalid_argument("MMA input dimensions are inconsistent");
    if (!x.allFinite() || !std::isfinite(f0val) || !df0dx.allFinite() ||
        !fval.allFinite() || !dfdx.allFinite() || !xmin.allFinite() ||
        !xmax.allFinite())
        throw std::invalid_argument("MMA inputs contain NaN or Inf");

    ++iter_;

    // Normalize the objective gradient so the step is exactly invariant under
    // positive rescaling of f0, and each constraint row so its multiplier
    // stays well below the c cap regardless of the caller's units.
    const double scale0 = std::max(df0dx.cwiseAbs().maxCoeff(), 1e-30);
    const Eigen::VectorXd df0 = df0dx / scale0;
    Eigen::MatrixXd dfs = dfdx;
    Eigen::VectorXd fvals = fval;
    for (int i = 0; i < m_; ++i) {
        const double si = std::max(dfdx.row(i).cwiseAbs().maxCoeff(), 1e-30);
        dfs.row(i) /= si;
        fvals[i] /= si;
    }

    const Eigen::VectorXd range = xmax - xmin;

    // Asymptote update: fixed spacing for the first two iterations, then the
    // oscillation heuristic with the standard clamping box.
    if (iter_ <= 2 || xold1_.size() != n_) {
        low_ = x - opts_.asyinit * range;
        upp_ = x + opts_.asyinit * range;
    } else {
        Eigen::VectorXd low = low_, upp = upp_;
        for (int j = 0; j < n_; ++j) {
            const double zzz = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
            double factor = 1.0;
            if (zzz > 0.0)
                factor = opts_.asyincr;
            else if (zzz < 0.0)
                factor = opts_.asydecr;
            low[j] = x[j] - factor * (xold1_[j] - low_[j]);
            upp[j] = x[j] + factor * (upp_[j] - xold1_[j]);
        }
        low_ = low.cwiseMax(x - 10.0 * range).cwiseMin(x - 0.01 * range);
        upp_ = upp.cwiseMin(x + 10.0 * range).cwiseMax(x + 0.01 * range);
    }

    Subproblem s;
    s.low = low_;
    s.upp = upp_;
    s.alfa = xmin.cwiseMax(low_ + opts_.albefa * (x - low_));
    s.beta = xmax.cwiseMin(upp_ - opts_.albefa * (upp_ - x));

    const Eigen::ArrayXd xmami = range.array().max(1e-5);
    const Eigen::ArrayXd ux2 = (upp_ - x).array().square();
    const Eigen::ArrayXd xl2 = (x - low_).array().square();

    {
        const Eigen::ArrayXd dpos = df0.array().max(0.0);
        const Eigen::ArrayXd dneg = (-df0.array()).max(0.0);
        const Eigen::ArrayXd pq = 0.001 * (dpos + dneg) + opts_.raa0 / xmami;
        s.p0 = ((dpos + pq) * ux2).matrix();
        s.q0 = ((dneg + pq) * xl2).matrix();
    }

    s.pmat.resize(m_, n_);
    s.qmat.resize(m_, n_);
    for (int i = 0; i < m_; ++i) {
        const Eigen::ArrayXd row = dfs.row(i).transpose().array();
        const Eigen::ArrayXd dpos = row.max(0.0);
        const Eigen::ArrayXd dneg = (-row).max(0.0);
        const Eigen::ArrayXd pq = 0.001 * (dpos + dneg) + opts_.raa0 / xmami;
        s.pmat.row(i) = ((dpos + pq) * ux2).matrix().transpose();
        s.qmat.row(i) = ((dneg + pq) * xl2).matrix().transpose();
    }

    const Eigen::ArrayXd uxinv = 1.0 / (upp_ - x).array();
    const Eigen::ArrayXd xlinv = 1.0 / (x - low_).array();
    s.b = s.pmat * uxinv.matrix() + s.qmat * xlinv.matrix() - fvals;

    if (m_ == 1) {
        double lam = solve_dual_scalar(s, opts_.c, opts_.max_dual_iter,
                                       opts_.dual_tol, kkt_);
        lambda_ = Eigen::VectorXd::Constant(1, lam);
    } else {
        lambda_ = solve_dual(s, opts_.c, opts_.max_dual_iter, opts_.dual_tol,
                             kkt_);
    }
    const Eigen::VectorXd xnew = primal_point(s, lambda_);

    xold2_ = (xold1_.size() == n_) ? xold1_ : x;
    xold1_ = x;
    (void)f0val;  // the subproblem depends on gradients and fval only
    return xnew;
}

} // namespace presstop
