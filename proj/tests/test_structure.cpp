#include "doctest.h"

#include <random>

#include <Eigen/Dense>

#include "presstop/errors.hpp"
#include "presstop/structure.hpp"

using namespace presstop;

namespace {

MaterialParams params() { return MaterialParams::make_defaults(3.0, 0.2, 8.0); }

Eigen::MatrixXd dense_stiffness(const Mesh& mesh, const Eigen::VectorXd& emod,
                                const ElementMatrices& em) {
    Eigen::MatrixXd k =
        Eigen::MatrixXd::Zero(mesh.num_udofs(), mesh.num_udofs());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& ud = mesh.udofs(e);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                k(ud[i], ud[j]) += emod[e] * em.ke(i, j);
    }
    return 0.5 * (k + k.transpose());
}

Eigen::VectorXd random_vec(int n, unsigned seed, double lo, double hi) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

} // namespace

TEST_CASE("single-element transformation matrix is the element one") {
    Mesh mesh(1, 1);
    const ElementMatrices em = reference_element_matrices(0.30);
    const Eigen::MatrixXd t =
        Eigen::MatrixXd(assemble_transformation(mesh, em));
    REQUIRE(t.rows() == 8);
    REQUIRE(t.cols() == 4);
    const auto& ud = mesh.udofs(0);
    const auto& pd = mesh.pdofs(0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(t(ud[i], pd[j]) == doctest::Approx(em.te(i, j)).epsilon(1e-15));
}

TEST_CASE("uniform pressure produces no consistent load anywhere") {
    Mesh mesh(6, 4);
    const ElementMatrices em = reference_element_matrices(0.30);
    const Eigen::SparseMatrix<double> t = assemble_transformation(mesh, em);
    const Eigen::VectorXd p =
        Eigen::VectorXd::Constant(mesh.num_nodes(), 0.8);
    const Eigen::VectorXd f = -(t * p);
    CHECK(f.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sparse stiffness matches the dense oracle") {
    const ElementMatrices em = reference_element_matrices(0.30);
    std::mt19937 gen(31);
    std::uniform_int_distribution<int> dim(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        Mesh mesh(dim(gen), dim(gen));
        const Eigen::VectorXd emod =
            random_vec(mesh.num_elements(), 500u + trial, 1e-6, 1.0);
        const Eigen::MatrixXd sparse =
            Eigen::MatrixXd(assemble_stiffness(mesh, emod, em));
        const Eigen::MatrixXd dense = dense_stiffness(mesh, emod, em);
        CHECK((sparse - dense).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("uniaxial patch test reproduces the exact linear field") {
    // Uniform bar under unit end traction: plane stress says
    // u_x = x/E, u_y = -nu*(y - y0)/E, and bilinear elements carry linear
    // fields exactly, so the FE answer must match to solver precision.
    const double nu = 0.30;
    Mesh mesh(3, 2);
    const ElementMatrices em = reference_element_matrices(nu);
    const Eigen::VectorXd emod = Eigen::VectorXd::Ones(mesh.num_elements());
    const Eigen::SparseMatrix<double> k = assemble_stiffness(mesh, emod, em);

    StructuralBc bc(mesh.num_udofs());
    for (int n : mesh.left_nodes()) bc.fix(2 * n);
    const int pin = mesh.node_id(mesh.nely(), 0); // bottom-left corner
    bc.fix(2 * pin + 1);

    Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.num_udofs());
    const auto right = mesh.right_nodes();
    for (std::size_t i = 0; i < right.size(); ++i) {
        const bool corner = (i == 0 || i + 1 == right.size());
        f[2 * right[i]] = corner ? 0.5 : 1.0;
    }

    const Eigen::VectorXd u = solve_displacement(k, f, bc);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        const int col = n / (mesh.nely() + 1);
        const int row = n % (mesh.nely() + 1);
        const double x = col;
        const double y = mesh.nely() - row; // y0 = 0 at the pinned corner
        CHECK(u[2 * n] == doctest::Approx(x).epsilon(1e-10));
        CHECK(u[2 * n + 1] ==
              doctest::Approx(-nu * y).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("compliance equals the work of the applied load") {
    Mesh mesh(4, 3);
    const ElementMatrices em = reference_element_matrices(0.30);
    const Eigen::VectorXd emod =
        random_vec(mesh.num_elements(), 61u, 0.1, 1.0);
    const Eigen::SparseMatrix<double> k = assemble_stiffness(mesh, emod, em);

    StructuralBc bc(mesh.num_udofs());
    for (int n : mesh.left_nodes()) bc.fix_node(n, true, true);

    Eigen::VectorXd f = random_vec(mesh.num_udofs(), 62u, -1.0, 1.0);
    for (int d = 0; d < mesh.num_udofs(); ++d)
        if (bc.fixed[d]) f[d] = 0.0;

    const Eigen::VectorXd u = solve_displacement(k, f, bc);
    const double c = compliance(k, u);
    CHECK(c == doctest::Approx(f.dot(u)).epsilon(1e-11));
    CHECK(c > 0.0);
}

TEST_CASE("cached solver reproduces the one-shot solve across designs") {
    const MaterialParams mp = params();
    const ElementMatrices em = reference_element_matrices(mp.nu);
    Mesh mesh(5, 3);

    StructuralBc bc(mesh.num_udofs());
    for (int n : mesh.bottom_nodes()) bc.fix_node(n, true, true);

    ElasticSolver solver(mesh, mp, em, bc);
    for (unsigned seed : {71u, 72u, 73u}) {
        const Eigen::VectorXd x =
            random_vec(mesh.num_elements(), seed, 0.0, 1.0);
        Eigen::VectorXd emod(mesh.num_elements());
        for (int e = 0; e < mesh.num_elements(); ++e)
            emod[e] = mp.simp_modulus(x[e]);
        const Eigen::VectorXd f =
            random_vec(mesh.num_udofs(), seed + 100, -1.0, 1.0);

        const Eigen::VectorXd u1 = solver.solve(x, f);
        const Eigen::VectorXd u2 =
            solve_displacement(assemble_stiffness(mesh, emod, em), f, bc);
        CHECK((u1 - u2).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("unconstrained solve fails loudly") {
    const ElementMatrices em = reference_element_matrices(0.30);
    Mesh mesh(2, 2);
    const Eigen::VectorXd emod = Eigen::VectorXd::Ones(mesh.num_elements());
    const Eigen::SparseMatrix<double> k = assemble_stiffness(mesh, emod, em);
    StructuralBc none(mesh.num_udofs());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.num_udofs());
    f[0] = 1.0; // not self-equilibrated: no finite-energy solution exists
    CHECK_THROWS_AS(solve_displacement(k, f, none), SolverError);
}

TEST_CASE("size validation") {
    const MaterialParams mp = params();
    const ElementMatrices em = reference_element_matrices(mp.nu);
    Mesh mesh(2, 2);
    CHECK_THROWS_AS(assemble_stiffness(mesh, Eigen::VectorXd::Ones(3), em),
                    std::invalid_argument);

    StructuralBc bc(mesh.num_udofs());
    for (int n : mesh.bottom_nodes()) bc.fix_node(n, true, true);
    ElasticSolver solver(mesh, mp, em, bc);
    CHECK_THROWS_AS(solver.solve(Eigen::VectorXd::Ones(3),
                                 Eigen::VectorXd::Zero(mesh.num_udofs())),
                    std::invalid_argument);
    CHECK_THROWS_AS(solver.solve(Eigen::VectorXd::Ones(4),
                                 Eigen::VectorXd::Zero(7)),
                    std::invalid_argument);

    StructuralBc all(mesh.num_udofs());
    for (int d = 0; d < mesh.num_udofs(); ++d) all.fix(d);
    CHECK_THROWS_AS(ElasticSolver(mesh, mp, em, all), std::invalid_argument);
}
