#include "presstop/structure.hpp"

#include <algorithm>
#include <stdexcept>

#include "presstop/errors.hpp"

namespace presstop {

namespace {

int csc_index(const Eigen::SparseMatrix<double>& m, int row, int col) {
    const int* outer = m.outerIndexPtr();
    const int* inner = m.innerIndexPtr();
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) return -1;
    return static_cast<int>(it - inner);
}

void check_residual(const Eigen::SparseMatrix<double>& a,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    const char* what) {
    const double rhs_norm = b.norm();
    const double res = (a * x - b).norm();
    // Divergence detector, not an accuracy gate: SIMP stiffness contrast is
    // 1e6, so a healthy factorization can sit a couple of digits above
    // machine-precision residuals. Written so a NaN residual lands in the
    // throwing branch.
    if (!(res <= 1e-8 * rhs_norm || res <= 1e-30))
        throw SolverError(std::string(what) +
                          ": residual " + std::to_string(res) +
                          " exceeds tolerance for rhs norm " +
                          std::to_string(rhs_norm));
}

} // namespace

Eigen::SparseMatrix<double> assemble_transformation(const Mesh& mesh,
                                                    const ElementMatrices& em) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(32 * static_cast<std::size_t>(mesh.num_elements()));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& ud = mesh.udofs(e);
        const auto& pd = mesh.pdofs(e);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j)
                trips.emplace_back(ud[i], pd[j], em.te(i, j));
    }
    Eigen::SparseMatrix<double> t(mesh.num_udofs(), mesh.num_nodes());
    t.setFromTriplets(trips.begin(), trips.end());
    return t;
}

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const Eigen::VectorXd& emod,
                                               const ElementMatrices& em) {
    if (emod.size() != mesh.num_elements())
        throw std::invalid_argument("modulus field size does not match mesh");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(64 * static_cast<std::size_t>(mesh.num_elements()));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& ud = mesh.udofs(e);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                trips.emplace_back(ud[i], ud[j], emod[e] * em.ke(i, j));
    }
    Eigen::SparseMatrix<double> k(mesh.num_udofs(), mesh.num_udofs());
    k.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseMatrix<double> kt = k.transpose();
    return 0.5 * (k + kt);
}

Eigen::VectorXd solve_displacement(const Eigen::SparseMatrix<double>& k,
                                   const Eigen::VectorXd& f,
                                   const StructuralBc& bc) {
    const int n = static_cast<int>(k.rows());
    if (static_cast<int>(bc.fixed.size()) != n || f.size() != n)
        throw std::invalid_argument("BC or force size does not match matrix");

    std::vector<int> free_of(n, -1);
    std::vector<int> free_dofs;
    for (int i = 0; i < n; ++i)
        if (!bc.fixed[i]) {
            free_of[i] = static_cast<int>(free_dofs.size());
            free_dofs.push_back(i);
        }
    const int nf = static_cast<int>(free_dofs.size());
    if (nf == 0) return Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(k.nonZeros());
    for (int col = 0; col < n; ++col) {
        const int fc = free_of[col];
        if (fc < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
            const int fr = free_of[static_cast<int>(it.row())];
            if (fr >= 0) trips.emplace_back(fr, fc, it.value());
        }
    }
    Eigen::SparseMatrix<double> kff(nf, nf);
    kff.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd rhs(nf);
    for (int i = 0; i < nf; ++i) rhs[i] = f[free_dofs[i]];

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(kff);
    if (llt.info() != Eigen::Success)
        throw SolverError("displacement solve: Cholesky factorization failed; "
                          "free-free stiffness block is not positive definite");
    const Eigen::VectorXd uf = llt.solve(rhs);
    check_residual(kff, uf, rhs, "displacement solve (free-free block)");

    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < nf; ++i) u[free_dofs[i]] = uf[i];
    return u;
}

double compliance(const Eigen::SparseMatrix<double>& k,
                  const Eigen::VectorXd& u) {
    return u.dot(k * u);
}

ElasticSolver::ElasticSolver(const Mesh& mesh, const MaterialParams& mp,
                             const ElementMatrices& em, StructuralBc bc)
    : mesh_(mesh), mp_(mp), em_(em), bc_(std::move(bc)) {
    const int n = mesh_.num_udofs();
    if (static_cast<int>(bc_.fixed.size()) != n)
        throw std::invalid_argument("structural BC size does not match mesh");

    free_of_dof_.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (!bc_.fixed[i]) {
            free_of_dof_[i] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(i);
        }
    const int nf = static_cast<int>(free_dofs_.size());
    if (nf == 0)
        throw std::invalid_argument("structural BC fixes every DOF");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(64 * static_cast<std::size_t>(mesh_.num_elements()));
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const auto& ud = mesh_.udofs(e);
        for (int i = 0; i < 8; ++i) {
            const int fr = free_of_dof_[ud[i]];
            if (fr < 0) continue;
            for (int j = 0; j < 8; ++j) {
                const int fc = free_of_dof_[ud[j]];
                if (fc >= 0) trips.emplace_back(fr, fc, 0.0);
            }
        }
    }
    kff_.resize(nf, nf);
    kff_.setFromTriplets(trips.begin(), trips.end());
    kff_.makeCompressed();

    scatter_.resize(mesh_.num_elements());
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const auto& ud = mesh_.udofs(e);
        for (int i = 0; i < 8; ++i) {
            const int fr = free_of_dof_[ud[i]];
            for (int j = 0; j < 8; ++j) {
                int code = -1;
                if (fr >= 0) {
                    const int fc = free_of_dof_[ud[j]];
                    if (fc >= 0) code = csc_index(kff_, fr, fc);
                }
                scatter_[e][8 * i + j] = code;
            }
        }
    }

    llt_.analyzePattern(kff_);
}

Eigen::VectorXd ElasticSolver::solve(const Eigen::VectorXd& xphys,
                                     const Eigen::VectorXd& f) {
    if (xphys.size() != mesh_.num_elements())
        throw std::invalid_argument("density field size does not match mesh");
    if (f.size() != mesh_.num_udofs())
        throw std::invalid_argument("force vector size does not match mesh");

    std::fill(kff_.valuePtr(), kff_.valuePtr() + kff_.nonZeros(), 0.0);
    double* values = kff_.valuePtr();
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const double emod = mp_.simp_modulus(xphys[e]);
        const auto& sc = scatter_[e];
        for (int k = 0; k < 64; ++k) {
            const int code = sc[k];
            if (code >= 0) values[code] += emod * em_.ke(k / 8, k % 8);
        }
    }

    llt_.factorize(kff_);
    if (llt_.info() != Eigen::Success)
        throw SolverError("elasticity solve: Cholesky factorization failed; "
                          "free-free stiffness block is not positive definite");

    const int nf = static_cast<int>(free_dofs_.size());
    Eigen::VectorXd rhs(nf);
    for (int i = 0; i < nf; ++i) rhs[i] = f[free_dofs_[i]];

    const Eigen::VectorXd uf = llt_.solve(rhs);
    check_residual(kff_, uf, rhs, "elasticity solve (free-free block)");

    Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh_.num_udofs());
    for (int i = 0; i < nf; ++i) u[free_dofs_[i]] = uf[i];
    return u;
}

} // namespace presstop
