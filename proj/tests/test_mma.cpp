#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "presstop/errors.hpp"
#include "presstop/mma.hpp"

using namespace presstop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("unconstrained quadratic settles at the minimizer") {
    // min (x - 0.3)^2 with an inert constraint x - 1 <= 0.
    //
    // An interior optimum with an inactive constraint is the worst case for
    // MMA accuracy: once the asymptote gap hits its clamp floor of
    // 0.01*(xmax-xmin) per side, the iterates enter a limit cycle whose
    // amplitude is the albefa step cap, 0.9 * 0.01 * (xmax - xmin) = 9e-3.
    // No update rule honoring the standard clamp can land closer than that
    // from a cold start, so that cap is the tolerance asserted here.
    MmaOptimizer mma(1, 1);
    VectorXd x(1);
    x << 0.8;
    const VectorXd xmin = VectorXd::Zero(1), xmax = VectorXd::Ones(1);
    for (int it = 0; it < 30; ++it) {
        const double f0 = (x[0] - 0.3) * (x[0] - 0.3);
        VectorXd df0(1);
        df0 << 2.0 * (x[0] - 0.3);
        VectorXd fval(1);
        fval << x[0] - 1.0;
        MatrixXd dfdx(1, 1);
        dfdx << 1.0;
        x = mma.update(x, f0, df0, fval, dfdx, xmin, xmax);
    }
    CHECK(std::abs(x[0] - 0.3) <= 9.5e-3);
}

TEST_CASE("equality-active constrained quadratic finds the KKT point") {
    // min x1^2 + x2^2  s.t.  1 - x1 - x2 <= 0  on [0,1]^2; optimum (0.5, 0.5).
    MmaOptimizer mma(2, 1);
    VectorXd x(2);
    x << 0.9, 0.1;
    const VectorXd xmin = VectorXd::Zero(2), xmax = VectorXd::Ones(2);
    for (int it = 0; it < 80; ++it) {
        const double f0 = x.squaredNorm();
        const VectorXd df0 = 2.0 * x;
        VectorXd fval(1);
        fval << 1.0 - x[0] - x[1];
        MatrixXd dfdx(1, 2);
        dfdx << -1.0, -1.0;
        x = mma.update(x, f0, df0, fval, dfdx, xmin, xmax);
    }
    CHECK(x[0] == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(x[1] == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::isfinite(mma.kkt_residual()));
}

TEST_CASE("iterates respect the passed bounds") {
    MmaOptimizer mma(3, 1);
    VectorXd x = VectorXd::Constant(3, 0.2);
    // Strong pull upward against a tight move window.
    VectorXd df0 = VectorXd::Constant(3, -50.0);
    VectorXd fval(1);
    fval << -0.5;
    MatrixXd dfdx = MatrixXd::Constant(1, 3, 0.01);
    const VectorXd xmin = VectorXd::Constant(3, 0.1);
    const VectorXd xmax = VectorXd::Constant(3, 0.3);
    const VectorXd xnew = mma.update(x, 1.0, df0, fval, dfdx, xmin, xmax);
    for (int j = 0; j < 3; ++j) {
        CHECK(xnew[j] >= 0.1);
        CHECK(xnew[j] <= 0.3);
        CHECK(xnew[j] > 0.25); // and it did move toward the pull
    }
}

TEST_CASE("asymptotes straddle the current point") {
    MmaOptimizer mma(4, 1);
    VectorXd x(4);
    x << 0.1, 0.4, 0.6, 0.95;
    const VectorXd xmin = VectorXd::Zero(4), xmax = VectorXd::Ones(4);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int it = 0; it < 10; ++it) {
        VectorXd df0(4);
        for (int j = 0; j < 4; ++j) df0[j] = dist(gen);
        VectorXd fval(1);
        fval << x.mean() - 0.8;
        MatrixXd dfdx = MatrixXd::Constant(1, 4, 0.25);
        const VectorXd xprev = x;
        x = mma.update(x, 1.0, df0, fval, dfdx, xmin, xmax);
        for (int j = 0; j < 4; ++j) {
            CHECK(mma.low()[j] < xprev[j]);
            CHECK(mma.upp()[j] > xprev[j]);
        }
    }
}

namespace {

struct Instance {
    VectorXd x, df0, xmin, xmax;
    VectorXd fval;
    MatrixXd dfdx;
    double f0;
};

Instance random_instance(std::mt19937& gen) {
    std::uniform_int_distribution<int> nd(2, 6);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    std::uniform_real_distribution<double> grad(-3.0, 3.0);
    const int n = nd(gen);
    Instance inst;
    inst.x.resize(n);
    inst.df0.resize(n);
    for (int j = 0; j < n; ++j) {
        inst.x[j] = unit(gen);
        inst.df0[j] = grad(gen);
    }
    inst.xmin = VectorXd::Zero(n);
    inst.xmax = VectorXd::Ones(n);
    inst.fval.resize(1);
    inst.fval << grad(gen) * 0.1;
    inst.dfdx.resize(1, n);
    for (int j = 0; j < n; ++j) inst.dfdx(0, j) = grad(gen);
    inst.f0 = std::abs(grad(gen)) + 0.1;
    return inst;
}

} // namespace

TEST_CASE("objective scaling leaves the step unchanged, bit for bit") {
    std::mt19937 gen(2024);
    std::uniform_int_distribution<int> expo(-20, 20);
    for (int trial = 0; trial < 100; ++trial) {
        const Instance inst = random_instance(gen);
        const double s = std::ldexp(1.0, expo(gen)); // exact power of two

        MmaOptimizer a(static_cast<int>(inst.x.size()), 1);
        MmaOptimizer b(static_cast<int>(inst.x.size()), 1);
        const VectorXd xa = a.update(inst.x, inst.f0, inst.df0, inst.fval,
                                     inst.dfdx, inst.xmin, inst.xmax);
        const VectorXd xb =
            b.update(inst.x, s * inst.f0, (s * inst.df0).eval(), inst.fval,
                     inst.dfdx, inst.xmin, inst.xmax);
        CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("arbitrary positive scalings agree to rounding error") {
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> sd(0.001, 900.0);
    for (int trial = 0; trial < 25; ++trial) {
        const Instance inst = random_instance(gen);
        const double s = sd(gen);
        MmaOptimizer a(static_cast<int>(inst.x.size()), 1);
        MmaOptimizer b(static_cast<int>(inst.x.size()), 1);
        const VectorXd xa = a.update(inst.x, inst.f0, inst.df0, inst.fval,
                                     inst.dfdx, inst.xmin, inst.xmax);
        const VectorXd xb =
            b.update(inst.x, s * inst.f0, (s * inst.df0).eval(), inst.fval,
                     inst.dfdx, inst.xmin, inst.xmax);
        CHECK((xa - xb).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("updates are deterministic") {
    std::mt19937 gen(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Instance inst = random_instance(gen);
        MmaOptimizer a(static_cast<int>(inst.x.size()), 1);
        MmaOptimizer b(static_cast<int>(inst.x.size()), 1);
        const VectorXd xa = a.update(inst.x, inst.f0, inst.df0, inst.fval,
                                     inst.dfdx, inst.xmin, inst.xmax);
        const VectorXd xb = b.update(inst.x, inst.f0, inst.df0, inst.fval,
                                     inst.dfdx, inst.xmin, inst.xmax);
        CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("invalid inputs are rejected") {
    MmaOptimizer mma(2, 1);
    VectorXd x(2);
    x << 0.5, 0.5;
    VectorXd df0(2);
    df0 << 1.0, std::nan("");
    VectorXd fval(1);
    fval << 0.0;
    MatrixXd dfdx(1, 2);
    dfdx << 1.0, 1.0;
    const VectorXd xmin = VectorXd::Zero(2), xmax = VectorXd::Ones(2);
    CHECK_THROWS_AS(mma.update(x, 1.0, df0, fval, dfdx, xmin, xmax),
                    std::invalid_argument);

    VectorXd good(2);
    good << 1.0, -1.0;
    CHECK_THROWS_AS(mma.update(x, 1.0, good, fval, MatrixXd::Ones(2, 2),
                               xmin, xmax),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        mma.update(VectorXd::Zero(3), 1.0, good, fval, dfdx, xmin, xmax),
        std::invalid_argument);
    CHECK_THROWS_AS(MmaOptimizer(0, 1), std::invalid_argument);
}

TEST_CASE("reset clears the iteration history") {
    MmaOptimizer mma(1, 1);
    VectorXd x(1);
    x << 0.5;
    VectorXd df0(1);
    df0 << 1.0;
    VectorXd fval(1);
    fval << -0.1;
    MatrixXd dfdx(1, 1);
    dfdx << 1.0;
    const VectorXd xmin = VectorXd::Zero(1), xmax = VectorXd::Ones(1);

    const VectorXd first =
        mma.update(x, 1.0, df0, fval, dfdx, xmin, xmax);
    mma.update(first, 1.0, df0, fval, dfdx, xmin, xmax);
    CHECK(mma.iteration() == 2);

    mma.reset();
    CHECK(mma.iteration() == 0);
    const VectorXd again =
        mma.update(x, 1.0, df0, fval, dfdx, xmin, xmax);
    CHECK((first - again).cwiseAbs().maxCoeff() == 0.0);
}
