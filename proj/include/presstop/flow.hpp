#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cstdint>
#include <vector>

#include "presstop/element.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Dirichlet data for the pressure field: fixed[n] marks node n as prescribed,
// values[n] holds the prescribed pressure there (ignored on free nodes).
struct PressureBc {
    Eigen::VectorXd values;
    std::vector<std::uint8_t> fixed;

    explicit PressureBc(int num_nodes)
        : values(Eigen::VectorXd::Zero(num_nodes)), fixed(num_nodes, 0) {}

    void set(int node, double p) {
        values[node] = p;
        fixed[node] = 1;
    }
};

// Global flow matrix: sum over elements of K(x)*kp + D(x)*kdp, symmetrized.
Eigen::SparseMatrix<double> assemble_flow(const Mesh& mesh,
                                          const Eigen::VectorXd& xphys,
                                          const MaterialParams& mp,
                                          const ElementMatrices& em);

// One-shot solve of A*p = 0 with Dirichlet pressures. Throws SolverError if
// the factorization fails or the residual is not small.
Eigen::VectorXd solve_pressure(const Eigen::SparseMatrix<double>& a,
                               const PressureBc& bc);

// Repeated pressure solves on a fixed mesh/BC: the reduced sparsity pattern is
// analyzed once, element contributions are scattered straight into the stored
// value array, and only the numeric factorization reruns per design.
class FlowSolver {
public:
    FlowSolver(const Mesh& mesh, const MaterialParams& mp,
               const ElementMatrices& em, PressureBc bc);

    // Solve for the full nodal pressure vector at the given physical design.
    Eigen::VectorXd solve(const Eigen::VectorXd& xphys);

    // Solve A(free,free) * lam = rhs(free) with the factorization from the
    // last solve(); entries at fixed nodes come back zero.
    Eigen::VectorXd adjoint(const Eigen::VectorXd& rhs_full) const;

    const PressureBc& bc() const { return bc_; }

private:
    const Mesh& mesh_;
    MaterialParams mp_;
    ElementMatrices em_;
    PressureBc bc_;

    std::vector<int> free_of_node_;   // node -> reduced index, -1 if fixed
    std::vector<int> free_nodes_;     // reduced index -> node
    Eigen::SparseMatrix<double> aff_; // reduced matrix, pattern fixed
    // For each element, where its 4x4 entries land (k = 4*i + j): >= 0
    // indexes into aff_.valuePtr(); -1 skips (fixed row); -(fr+2) accumulates
    // -ae(i,j)*prescribed(col) into the Dirichlet RHS at free row fr.
    std::vector<std::array<int, 16>> scatter_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool factored_ = false;
};

} // namespace presstop
