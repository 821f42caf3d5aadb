#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "presstop/flow.hpp"
#include "presstop/sensitivity.hpp"
#include "presstop/structure.hpp"

using namespace presstop;

namespace {

struct Setup {
    Mesh mesh;
    MaterialParams mp;
    ElementMatrices em;
    PressureBc pbc;
    StructuralBc ubc;

    Setup(int nelx, int nely)
        : mesh(nelx, nely),
          mp(MaterialParams::make_defaults(3.0, 0.2, 8.0)),
          em(reference_element_matrices(0.30)),
          pbc(mesh.num_nodes()),
          ubc(mesh.num_udofs()) {
        for (int n : mesh.top_nodes()) pbc.set(n, 0.0);
        for (int n : mesh.left_nodes()) pbc.set(n, 0.0);
        for (int n : mesh.right_nodes()) pbc.set(n, 0.0);
        for (int n : mesh.bottom_nodes()) pbc.set(n, 1.0);
        ubc.fix_node(mesh.node_id(nely, 0), true, true);
        ubc.fix_node(mesh.node_id(nely, nelx), true, true);
    }
};

Eigen::VectorXd pressure_at(const Setup& s, const Eigen::VectorXd& x) {
    return solve_pressure(assemble_flow(s.mesh, x, s.mp, s.em), s.pbc);
}

Eigen::VectorXd displacement_at(const Setup& s, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& f) {
    Eigen::VectorXd emod(s.mesh.num_elements());
    for (int e = 0; e < s.mesh.num_elements(); ++e)
        emod[e] = s.mp.simp_modulus(x[e]);
    return solve_displacement(assemble_stiffness(s.mesh, emod, s.em), f,
                              s.ubc);
}

// Full coupled objective; with frozen_f set, the load from the base design
// is reused so only the stiffness responds to the perturbation.
double objective_at(const Setup& s, const Eigen::VectorXd& x,
                    const Eigen::SparseMatrix<double>& t,
                    const Eigen::VectorXd* frozen_f) {
    Eigen::VectorXd f;
    if (frozen_f)
        f = *frozen_f;
    else
        f = -(t * pressure_at(s, x));
    const Eigen::VectorXd u = displacement_at(s, x, f);
    return f.dot(u);
}

Eigen::VectorXd smooth_density(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(0.25, 0.75);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

} // namespace

TEST_CASE("adjoint state matches a dense computation") {
    Setup s(2, 2);
    const Eigen::VectorXd x = smooth_density(s.mesh.num_elements(), 3u);
    const Eigen::SparseMatrix<double> t =
        assemble_transformation(s.mesh, s.em);

    FlowSolver flow(s.mesh, s.mp, s.em, s.pbc);
    const Eigen::VectorXd p = flow.solve(x);
    const Eigen::VectorXd f = -(t * p);
    const Eigen::VectorXd u = displacement_at(s, x, f);

    const Eigen::VectorXd lam = solve_adjoint(flow, t, u);

    // Dense: lam_f = Aff^{-1} (2 T^T u)_f, zero on Dirichlet nodes.
    const Eigen::MatrixXd a =
        Eigen::MatrixXd(assemble_flow(s.mesh, x, s.mp, s.em));
    const Eigen::VectorXd rhs = 2.0 * (t.transpose() * u);
    std::vector<int> free;
    for (int n = 0; n < s.mesh.num_nodes(); ++n)
        if (!s.pbc.fixed[n]) free.push_back(n);
    const int nf = static_cast<int>(free.size());
    REQUIRE(nf > 0);
    Eigen::MatrixXd aff(nf, nf);
    Eigen::VectorXd rf(nf);
    for (int i = 0; i < nf; ++i) {
        rf[i] = rhs[free[i]];
        for (int j = 0; j < nf; ++j) aff(i, j) = a(free[i], free[j]);
    }
    const Eigen::VectorXd lf = aff.ldlt().solve(rf);

    for (int i = 0; i < nf; ++i)
        CHECK(lam[free[i]] == doctest::Approx(lf[i]).epsilon(1e-10));
    for (int n = 0; n < s.mesh.num_nodes(); ++n)
        if (s.pbc.fixed[n]) CHECK(lam[n] == 0.0);
}

TEST_CASE("full sensitivities match componentwise finite differences") {
    Setup s(6, 4);
    const Eigen::VectorXd x0 = smooth_density(s.mesh.num_elements(), 17u);
    const Eigen::SparseMatrix<double> t =
        assemble_transformation(s.mesh, s.em);

    FlowSolver flow(s.mesh, s.mp, s.em, s.pbc);
    const Eigen::VectorXd p = flow.solve(x0);
    const Eigen::VectorXd f = -(t * p);
    const Eigen::VectorXd u = displacement_at(s, x0, f);
    const Eigen::VectorXd lam = solve_adjoint(flow, t, u);

    const Eigen::VectorXd grad =
        compliance_sensitivities(s.mesh, x0, p, u, lam, s.mp, s.em, true);

    const double h = 1e-6;
    for (int e = 0; e < s.mesh.num_elements(); ++e) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[e] += h;
        xm[e] -= h;
        const double fd = (objective_at(s, xp, t, nullptr) -
                           objective_at(s, xm, t, nullptr)) /
                          (2 * h);
        CHECK(std::abs(fd - grad[e]) <=
              std::max(1e-8, 1e-5 * std::abs(grad[e])));
    }
}

TEST_CASE("frozen-load sensitivities match finite differences") {
    Setup s(5, 4);
    const Eigen::VectorXd x0 = smooth_density(s.mesh.num_elements(), 23u);
    const Eigen::SparseMatrix<double> t =
        assemble_transformation(s.mesh, s.em);

    FlowSolver flow(s.mesh, s.mp, s.em, s.pbc);
    const Eigen::VectorXd p = flow.solve(x0);
    const Eigen::VectorXd f = -(t * p);
    const Eigen::VectorXd u = displacement_at(s, x0, f);

    // Load sensitivities off: the adjoint is not needed and must be ignored.
    const Eigen::VectorXd lam_garbage =
        Eigen::VectorXd::Constant(s.mesh.num_nodes(), 1e6);
    const Eigen::VectorXd grad = compliance_sensitivities(
        s.mesh, x0, p, u, lam_garbage, s.mp, s.em, false);

    const double h = 1e-6;
    for (int e = 0; e < s.mesh.num_elements(); ++e) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[e] += h;
        xm[e] -= h;
        const double fd =
            (objective_at(s, xp, t, &f) - objective_at(s, xm, t, &f)) /
            (2 * h);
        CHECK(std::abs(fd - grad[e]) <=
              std::max(1e-8, 1e-5 * std::abs(grad[e])));
    }
}

TEST_CASE("stiffness term is always nonpositive, and load terms shift it") {
    Setup s(4, 3);
    const Eigen::VectorXd x = smooth_density(s.mesh.num_elements(), 41u);
    const Eigen::SparseMatrix<double> t =
        assemble_transformation(s.mesh, s.em);
    FlowSolver flow(s.mesh, s.mp, s.em, s.pbc);
    const Eigen::VectorXd p = flow.solve(x);
    const Eigen::VectorXd f = -(t * p);
    const Eigen::VectorXd u = displacement_at(s, x, f);
    const Eigen::VectorXd lam = solve_adjoint(flow, t, u);

    const Eigen::VectorXd without =
        compliance_sensitivities(s.mesh, x, p, u, lam, s.mp, s.em, false);
    CHECK(without.maxCoeff() <= 0.0);

    const Eigen::VectorXd with =
        compliance_sensitivities(s.mesh, x, p, u, lam, s.mp, s.em, true);
    CHECK((with - without).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("volume constraint value and gradient") {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.25);
    CHECK(volume_constraint(x, 0.25) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(volume_constraint(x, 0.5) == doctest::Approx(-0.5).epsilon(1e-14));

    x[0] = 1.0;
    const double mean = x.mean();
    CHECK(volume_constraint(x, 0.3) ==
          doctest::Approx(mean / 0.3 - 1.0).epsilon(1e-13));

    const double g = volume_constraint_gradient(8, 0.3);
    CHECK(g == doctest::Approx(1.0 / (8 * 0.3)).epsilon(1e-15));

    // The gradient is exact: g(x+d) = g(x) + g * sum(d) identically.
    Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(8, -0.1, 0.12);
    CHECK(volume_constraint(x + d, 0.3) ==
          doctest::Approx(volume_constraint(x, 0.3) + g * d.sum())
              .epsilon(1e-12));

    CHECK_THROWS_AS(volume_constraint(x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(volume_constraint(x, -0.2), std::invalid_argument);
    CHECK_THROWS_AS(volume_constraint_gradient(8, 1.5),
                    std::invalid_argument);
}
