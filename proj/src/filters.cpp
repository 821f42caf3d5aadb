#include "presstop/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "presstop/element.hpp"

namespace presstop {

DensityFilter::DensityFilter(int nelx, int nely, double rmin)
    : nelx_(nelx), nely_(nely), rmin_(rmin) {
    if (nelx < 1 || nely < 1)
        throw std::invalid_argument("filter grid dimensions must be positive");
    if (rmin <= 0.0)
        throw std::invalid_argument("filter radius must be positive");

    reach_ = static_cast<int>(std::ceil(rmin)) - 1;
    const int size = 2 * reach_ + 1;
    kernel_.resize(size, size);
    for (int i = -reach_; i <= reach_; ++i)
        for (int j = -reach_; j <= reach_; ++j)
            kernel_(i + reach_, j + reach_) =
                std::max(0.0, rmin - std::hypot(double(i), double(j)));

    hs_ = correlate(Eigen::VectorXd::Ones(nelx_ * nely_));
}

Eigen::VectorXd DensityFilter::correlate(const Eigen::VectorXd& field) const {
    if (field.size() != static_cast<Eigen::Index>(nelx_) * nely_)
        throw std::invalid_argument("field size does not match filter grid");

    Eigen::VectorXd out(field.size());
    for (int c = 0; c < nelx_; ++c) {
        const int c0 = std::max(0, c - reach_);
        const int c1 = std::min(nelx_ - 1, c + reach_);
        for (int r = 0; r < nely_; ++r) {
            const int r0 = std::max(0, r - reach_);
            const int r1 = std::min(nely_ - 1, r + reach_);
            double acc = 0.0;
            for (int cc = c0; cc <= c1; ++cc) {
                const double* col = field.data() + cc * nely_;
                for (int rr = r0; rr <= r1; ++rr)
                    acc += kernel_(rr - r + reach_, cc - c + reach_) * col[rr];
            }
            out[c * nely_ + r] = acc;
        }
    }
    return out;
}

Eigen::VectorXd DensityFilter::apply(const Eigen::VectorXd& field) const {
    return correlate(field).cwiseQuotient(hs_);
}

Eigen::VectorXd DensityFilter::backproject(const Eigen::VectorXd& sens,
                                           const Eigen::VectorXd& divisor) const {
    if (divisor.size() != sens.size())
        throw std::invalid_argument("divisor size does not match field");
    if ((divisor.array() <= 0.0).any())
        throw std::domain_error("filter back-projection divisor must be positive");
    return correlate(sens.cwiseQuotient(divisor));
}

Eigen::VectorXd project(const Eigen::VectorXd& xtilde, double eta, double beta) {
    Eigen::VectorXd out(xtilde.size());
    for (Eigen::Index i = 0; i < xtilde.size(); ++i)
        out[i] = heaviside(xtilde[i], eta, beta);
    return out;
}

Eigen::VectorXd project_derivative(const Eigen::VectorXd& xtilde, double eta,
                                   double beta) {
    Eigen::VectorXd out(xtilde.size());
    for (Eigen::Index i = 0; i < xtilde.size(); ++i)
        out[i] = heaviside_derivative(xtilde[i], eta, beta);
    return out;
}

ProjectionParams continuation_step(int loop, ProjectionParams params) {
    if (loop >= 1 && loop % params.period == 0 && params.beta <= params.betamax)
        params.beta *= 2.0;
    return params;
}

double grayness_measure(const Eigen::VectorXd& xphys) {
    if (xphys.size() == 0) return 0.0;
    const double sum = (4.0 * xphys.array() * (1.0 - xphys.array())).sum();
    return 100.0 * sum / static_cast<double>(xphys.size());
}

} // namespace presstop
