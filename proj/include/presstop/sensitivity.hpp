#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "presstop/element.hpp"
#include "presstop/flow.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Flow adjoint for compliance with design-dependent loads. With C = u'Ku and
// F = -T p, eliminating the structural adjoint leaves A lam = 2 T' u on the
// free pressure nodes; fixed nodes carry lam = 0.
Eigen::VectorXd solve_adjoint(const FlowSolver& flow,
                              const Eigen::SparseMatrix<double>& t,
                              const Eigen::VectorXd& u);

// dC/dxphys per element: the SIMP stiffness term plus (when load
// sensitivities are on) the adjoint load term from the design-dependent flow
// matrix.
Eigen::VectorXd compliance_sensitivities(const Mesh& mesh,
                                         const Eigen::VectorXd& xphys,
                                         const Eigen::VectorXd& p,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& lam,
                                         const MaterialParams& mp,
                                         const ElementMatrices& em,
                                         bool load_sensitivities);

// Normalized volume constraint value sum(xphys)/(nel*volfrac) - 1 and its
// (constant) gradient 1/(nel*volfrac).
double volume_constraint(const Eigen::VectorXd& xphys, double volfrac);
double volume_constraint_gradient(int num_elements, double volfrac);

} // namespace presstop
