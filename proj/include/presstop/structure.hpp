#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cstdint>
#include <vector>

#include "presstop/element.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Homogeneous displacement constraints: fixed[d] marks dof d as pinned.
struct StructuralBc {
    std::vector<std::uint8_t> fixed;

    explicit StructuralBc(int num_udofs) : fixed(num_udofs, 0) {}

    void fix(int dof) { fixed[dof] = 1; }
    void fix_node(int node, bool x, bool y) {
        if (x) fixed[2 * node] = 1;
        if (y) fixed[2 * node + 1] = 1;
    }
};

// Pressure-to-force coupling matrix T (num_udofs x num_nodes): consistent
// nodal loads are F = -T * p.
Eigen::SparseMatrix<double> assemble_transformation(const Mesh& mesh,
                                                    const ElementMatrices& em);

// Global stiffness: sum over elements of E(e) * ke, symmetrized. emod holds
// the per-element interpolated modulus.
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const Eigen::VectorXd& emod,
                                               const ElementMatrices& em);

// One-shot solve of K*u = f with homogeneous Dirichlet dofs.
Eigen::VectorXd solve_displacement(const Eigen::SparseMatrix<double>& k,
                                   const Eigen::VectorXd& f,
                                   const StructuralBc& bc);

double compliance(const Eigen::SparseMatrix<double>& k,
                  const Eigen::VectorXd& u);

// Repeated elasticity solves on a fixed mesh/BC, same caching scheme as
// FlowSolver: pattern analyzed once, values rescattered per design.
class ElasticSolver {
public:
    ElasticSolver(const Mesh& mesh, const MaterialParams& mp,
                  const ElementMatrices& em, StructuralBc bc);

    // Factor K(xphys) and solve for the full displacement vector.
    Eigen::VectorXd solve(const Eigen::VectorXd& xphys,
                          const Eigen::VectorXd& f);

    const StructuralBc& bc() const { return bc_; }

private:
    const Mesh& mesh_;
    MaterialParams mp_;
    ElementMatrices em_;
    StructuralBc bc_;

    std::vector<int> free_of_dof_;
    std::vector<int> free_dofs_;
    Eigen::SparseMatrix<double> kff_;
    std::vector<std::array<int, 64>> scatter_; // -1 entries hit fixed dofs
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

} // namespace presstop
