#include "presstop/sensitivity.hpp"

#include <stdexcept>

namespace presstop {

Eigen::VectorXd solve_adjoint(const FlowSolver& flow,
                              const Eigen::SparseMatrix<double>& t,
                              const Eigen::VectorXd& u) {
    if (u.size() != t.rows())
        throw std::invalid_argument("displacement size does not match T");
    const Eigen::VectorXd rhs = 2.0 * (t.transpose() * u);
    return flow.adjoint(rhs);
}

Eigen::VectorXd compliance_sensitivities(const Mesh& mesh,
                                         const Eigen::VectorXd& xphys,
                                         const Eigen::VectorXd& p,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& lam,
                                         const MaterialParams& mp,
                                         const ElementMatrices& em,
                                         bool load_sensitivities) {
    if (xphys.size() != mesh.num_elements())
        throw std::invalid_argument("density field size does not match mesh");

    Eigen::VectorXd sens(mesh.num_elements());
    Eigen::Matrix<double, 8, 1> ue;
    Eigen::Vector4d pe, le;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& ud = mesh.udofs(e);
        for (int i = 0; i < 8; ++i) ue[i] = u[ud[i]];
        double val = -mp.simp_modulus_derivative(xphys[e]) *
                     ue.dot(em.ke * ue);

        if (load_sensitivities) {
            const auto& pd = mesh.pdofs(e);
            for (int i = 0; i < 4; ++i) {
                pe[i] = p[pd[i]];
                le[i] = lam[pd[i]];
            }
            // dA/drho contracted with (lam, p): the flow coefficient falls
            // with density, the drainage term grows with it.
            val += mp.flow_coefficient_derivative(xphys[e]) *
                       le.dot(em.kp * pe) +
                   mp.drainage_coefficient_derivative(xphys[e]) *
                       le.dot(em.kdp * pe);
        }
        sens[e] = val;
    }
    return sens;
}

double volume_constraint(const Eigen::VectorXd& xphys, double volfrac) {
    if (volfrac <= 0.0 || volfrac > 1.0)
        throw std::invalid_argument("volume fraction must be in (0, 1]");
    return xphys.sum() /
               (static_cast<double>(xphys.size()) * volfrac) -
           1.0;
}

double volume_constraint_gradient(int num_elements, double volfrac) {
    if (volfrac <= 0.0 || volfrac > 1.0)
        throw std::invalid_argument("volume fraction must be in (0, 1]");
    return 1.0 / (static_cast<double>(num_elements) * volfrac);
}

} // namespace presstop
