#include "presstop/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "presstop/errors.hpp"

namespace presstop {

namespace {

// Position of entry (row, col) inside the value array of a compressed
// column-major sparse matrix; -1 if the pattern has no such entry.
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
    // Divergence detector, not an accuracy gate: the permeability contrast
    // reaches 1e7 on projected designs, so a healthy factorization can sit
    // a couple of digits above machine-precision residuals. Written so a
    // NaN residual lands in the throwing branch.
    if (!(res <= 1e-8 * rhs_norm || res <= 1e-30))
        throw SolverError(std::string(what) +
                          ": residual " + std::to_string(res) +
                          " exceeds tolerance for rhs norm " +
                          std::to_string(rhs_norm));
}

} // namespace

Eigen::SparseMatrix<double> assemble_flow(const Mesh& mesh,
                                          const Eigen::VectorXd& xphys,
                                          const MaterialParams& mp,
                                          const ElementMatrices& em) {
    if (xphys.size() != mesh.num_elements())
        throw std::invalid_argument("density field size does not match mesh");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(16 * static_cast<std::size_t>(mesh.num_elements()));
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double kc = mp.flow_coefficient(xphys[e]);
        const double dc = mp.drainage_coefficient(xphys[e]);
        const Eigen::Matrix4d ae = kc * em.kp + dc * em.kdp;
        const auto& pd = mesh.pdofs(e);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                trips.emplace_back(pd[i], pd[j], ae(i, j));
    }

    Eigen::SparseMatrix<double> a(mesh.num_nodes(), mesh.num_nodes());
    a.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseMatrix<double> at = a.transpose();
    return 0.5 * (a + at);
}

Eigen::VectorXd solve_pressure(const Eigen::SparseMatrix<double>& a,
                               const PressureBc& bc) {
    const int n = static_cast<int>(a.rows());
    if (static_cast<int>(bc.fixed.size()) != n || bc.values.size() != n)
        throw std::invalid_argument("pressure BC size does not match matrix");

    std::vector<int> free_of(n, -1);
    std::vector<int> free_nodes;
    for (int i = 0; i < n; ++i)
        if (!bc.fixed[i]) {
            free_of[i] = static_cast<int>(free_nodes.size());
            free_nodes.push_back(i);
        }
    const int nf = static_cast<int>(free_nodes.size());

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (bc.fixed[i]) p[i] = bc.values[i];
    if (nf == 0) return p;

    // Reduced system: Aff pf = -Afc pc.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.nonZeros());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (int col = 0; col < n; ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
            const int fr = free_of[static_cast<int>(it.row())];
            if (fr < 0) continue;
            const int fc = free_of[col];
            if (fc >= 0)
                trips.emplace_back(fr, fc, it.value());
            else
                rhs[fr] -= it.value() * bc.values[col];
        }
    }
    Eigen::SparseMatrix<double> aff(nf, nf);
    aff.setFromTriplets(trips.begin(), trips.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(aff);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("pressure solve: LDLT factorization of the "
                          "free-free block failed");
    const Eigen::VectorXd pf = ldlt.solve(rhs);
    check_residual(aff, pf, rhs, "pressure solve (free-free block)");

    for (int i = 0; i < nf; ++i) p[free_nodes[i]] = pf[i];
    return p;
}

FlowSolver::FlowSolver(const Mesh& mesh, const MaterialParams& mp,
                       const ElementMatrices& em, PressureBc bc)
    : mesh_(mesh), mp_(mp), em_(em), bc_(std::move(bc)) {
    const int n = mesh_.num_nodes();
    if (static_cast<int>(bc_.fixed.size()) != n)
        throw std::invalid_argument("pressure BC size does not match mesh");

    free_of_node_.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (!bc_.fixed[i]) {
            free_of_node_[i] = static_cast<int>(free_nodes_.size());
            free_nodes_.push_back(i);
        }
    const int nf = static_cast<int>(free_nodes_.size());
    if (nf == 0)
        throw std::invalid_argument("pressure BC fixes every node");

    // Sparsity pattern of the reduced matrix, fixed across designs.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(16 * static_cast<std::size_t>(mesh_.num_elements()));
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const auto& pd = mesh_.pdofs(e);
        for (int i = 0; i < 4; ++i) {
            const int fr = free_of_node_[pd[i]];
            if (fr < 0) continue;
            for (int j = 0; j < 4; ++j) {
                const int fc = free_of_node_[pd[j]];
                if (fc >= 0) trips.emplace_back(fr, fc, 0.0);
            }
        }
    }
    aff_.resize(nf, nf);
    aff_.setFromTriplets(trips.begin(), trips.end());
    aff_.makeCompressed();

    scatter_.resize(mesh_.num_elements());
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const auto& pd = mesh_.pdofs(e);
        for (int i = 0; i < 4; ++i) {
            const int fr = free_of_node_[pd[i]];
            for (int j = 0; j < 4; ++j) {
                int code = -1;
                if (fr >= 0) {
                    const int fc = free_of_node_[pd[j]];
                    if (fc >= 0)
                        code = csc_index(aff_, fr, fc);
                    else
                        code = -(fr + 2);
                }
                scatter_[e][4 * i + j] = code;
            }
        }
    }

    ldlt_.analyzePattern(aff_);
}

Eigen::VectorXd FlowSolver::solve(const Eigen::VectorXd& xphys) {
    if (xphys.size() != mesh_.num_elements())
        throw std::invalid_argument("density field size does not match mesh");

    const int nf = static_cast<int>(free_nodes_.size());
    std::fill(aff_.valuePtr(), aff_.valuePtr() + aff_.nonZeros(), 0.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);

    double* values = aff_.valuePtr();
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const double kc = mp_.flow_coefficient(xphys[e]);
        const double dc = mp_.drainage_coefficient(xphys[e]);
        const Eigen::Matrix4d ae = kc * em_.kp + dc * em_.kdp;
        const auto& pd = mesh_.pdofs(e);
        const auto& sc = scatter_[e];
        for (int k = 0; k < 16; ++k) {
            const int code = sc[k];
            if (code >= 0)
                values[code] += ae(k / 4, k % 4);
            else if (code <= -2)
                rhs[-code - 2] -= ae(k / 4, k % 4) * bc_.values[pd[k % 4]];
        }
    }

    ldlt_.factorize(aff_);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("flow solve: LDLT factorization of the free-free "
                          "block failed");
    factored_ = true;

    const Eigen::VectorXd pf = ldlt_.solve(rhs);
    check_residual(aff_, pf, rhs, "flow solve (free-free block)");

    Eigen::VectorXd p = Eigen::VectorXd::Zero(mesh_.num_nodes());
    for (int i = 0; i < mesh_.num_nodes(); ++i)
        if (bc_.fixed[i]) p[i] = bc_.values[i];
    for (int i = 0; i < nf; ++i) p[free_nodes_[i]] = pf[i];
    return p;
}

Eigen::VectorXd FlowSolver::adjoint(const Eigen::VectorXd& rhs_full) const {
    if (!factored_)
        throw SolverError("flow adjoint requested before any state solve");
    if (rhs_full.size() != mesh_.num_nodes())
        throw std::invalid_argument("adjoint RHS size does not match mesh");

    const int nf = static_cast<int>(free_nodes_.size());
    Eigen::VectorXd rhs(nf);
    for (int i = 0; i < nf; ++i) rhs[i] = rhs_full[free_nodes_[i]];

    const Eigen::VectorXd lf = ldlt_.solve(rhs);
    check_residual(aff_, lf, rhs, "flow adjoint (free-free block)");

    Eigen::VectorXd lam = Eigen::VectorXd::Zero(mesh_.num_nodes());
    for (int i = 0; i < nf; ++i) lam[free_nodes_[i]] = lf[i];
    return lam;
}

} // namespace presstop
