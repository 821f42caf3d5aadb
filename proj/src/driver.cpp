#include "presstop/driver.hpp"

#include <algorithm>
#include <stdexcept>

#include "presstop/element.hpp"
#include "presstop/errors.hpp"
#include "presstop/flow.hpp"
#include "presstop/mma.hpp"
#include "presstop/sensitivity.hpp"
#include "presstop/structure.hpp"

namespace presstop {

void RunConfig::validate() const {
    if (!(volfrac > 0.0 && volfrac < 1.0))
        throw std::invalid_argument("volfrac must lie in (0, 1)");
    if (!(penal >= 1.0))
        throw std::invalid_argument("penal must be >= 1");
    if (!(rmin > 0.0))
        throw std::invalid_argument("rmin must be positive");
    if (maxit < 1)
        throw std::invalid_argument("maxit must be >= 1");
    if (!(etaf > 0.0 && etaf < 1.0))
        throw std::invalid_argument("etaf must lie in (0, 1)");
    if (!(betaf > 0.0))
        throw std::invalid_argument("betaf must be positive");
    if (!(change_tol >= 0.0))
        throw std::invalid_argument("change tolerance must be nonnegative");
    if (!(move > 0.0))
        throw std::invalid_argument("move limit must be positive");
    if (projection) {
        if (!(projection->beta > 0.0) || !(projection->betamax >= projection->beta))
            throw std::invalid_argument("projection needs 0 < beta <= betamax");
        if (!(projection->eta > 0.0 && projection->eta < 1.0))
            throw std::invalid_argument("projection eta must lie in (0, 1)");
        if (projection->period < 1)
            throw std::invalid_argument("projection period must be >= 1");
    }
}

namespace {

std::vector<int> active_elements(const ProblemSpec& spec) {
    std::vector<char> frozen(spec.mesh.num_elements(), 0);
    for (int e : spec.nds) frozen[e] = 1;
    for (int e : spec.ndv) frozen[e] = 1;
    std::vector<int> act;
    act.reserve(frozen.size());
    for (int e = 0; e < spec.mesh.num_elements(); ++e)
        if (!frozen[e]) act.push_back(e);
    return act;
}

Eigen::VectorXd gather(const Eigen::VectorXd& full,
                       const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = full[idx[i]];
    return out;
}

} // namespace

Eigen::VectorXd initialize(const ProblemSpec& spec, const RunConfig& cfg) {
    cfg.validate();
    const int nel = spec.mesh.num_elements();
    const std::vector<int> act = active_elements(spec);
    if (act.empty())
        throw std::invalid_argument("problem has no active design elements");

    const double val =
        (cfg.volfrac * (nel - static_cast<double>(spec.ndv.size())) -
         static_cast<double>(spec.nds.size())) /
        static_cast<double>(act.size());
    if (val < -1e-12 || val > 1.0 + 1e-12)
        throw std::invalid_argument(
            "volume budget incompatible with non-design regions (initial "
            "density " +
            std::to_string(val) + " outside [0, 1])");

    Eigen::VectorXd x = Eigen::VectorXd::Zero(nel);
    const double clamped = std::clamp(val, 0.0, 1.0);
    for (int e : act) x[e] = clamped;
    for (int e : spec.nds) x[e] = 1.0;
    for (int e : spec.ndv) x[e] = 0.0;
    return x;
}

OptResult optimize(const ProblemSpec& spec, const RunConfig& cfg,
                   const IterationCallback& on_iteration) {
    cfg.validate();
    const Mesh& mesh = spec.mesh;
    const int nel = mesh.num_elements();

    MaterialParams mp =
        MaterialParams::make_defaults(cfg.penal, cfg.etaf, cfg.betaf);
    const ElementMatrices em = reference_element_matrices(mp.nu);
    const DensityFilter filter(mesh.nelx(), mesh.nely(), cfg.rmin);
    FlowSolver flow(mesh, mp, em, spec.pressure_bc);
    ElasticSolver elastic(mesh, mp, em, spec.structural_bc);
    const Eigen::SparseMatrix<double> t = assemble_transformation(mesh, em);

    const std::vector<int> act = active_elements(spec);
    Eigen::VectorXd x = initialize(spec, cfg);
    Eigen::VectorXd xval = gather(x, act);

    const bool projecting = cfg.projection.has_value();
    ProjectionParams proj = projecting ? *cfg.projection : ProjectionParams{};

    MmaOptimizer mma(static_cast<int>(act.size()), 1);

    const double dvol0 = volume_constraint_gradient(nel, cfg.volfrac);
    // Without projection the filtered volume gradient is constant; build it
    // once like the reference does.
    const Eigen::VectorXd dvol_plain =
        filter.backproject(Eigen::VectorXd::Constant(nel, dvol0),
                           filter.weight_sum());

    OptResult res;
    double normf = 1.0;
    double change = 1.0;
    int loop = 0;

    while (loop < cfg.maxit && change > cfg.change_tol) {
        ++loop;

        Eigen::VectorXd xtilde = filter.apply(x);
        Eigen::VectorXd xphys =
            projecting ? project(xtilde, proj.eta, proj.beta) : xtilde;
        for (int e : spec.nds) xphys[e] = 1.0;
        for (int e : spec.ndv) xphys[e] = 0.0;

        const Eigen::VectorXd p = flow.solve(xphys);
        const Eigen::VectorXd f = -(t * p);
        const Eigen::VectorXd u = elastic.solve(xphys, f);
        const double compliance = f.dot(u);

        Eigen::VectorXd lam;
        if (cfg.lst)
            lam = solve_adjoint(flow, t, u);
        else
            lam = Eigen::VectorXd::Zero(mesh.num_nodes());

        Eigen::VectorXd dobj =
            compliance_sensitivities(mesh, xphys, p, u, lam, mp, em, cfg.lst);
        const double vol = volume_constraint(xphys, cfg.volfrac);

        if (loop == 1) normf = 1000.0 / compliance;
        dobj *= normf;

        Eigen::VectorXd dvol_full;
        if (projecting) {
            const Eigen::VectorXd dproj =
                project_derivative(xtilde, proj.eta, proj.beta);
            dobj = filter.backproject(dobj.cwiseProduct(dproj),
                                      filter.weight_sum());
            dvol_full = filter.backproject(
                Eigen::VectorXd::Constant(nel, dvol0).cwiseProduct(dproj),
                filter.weight_sum());
        } else {
            dobj = filter.backproject(dobj, filter.weight_sum());
            dvol_full = dvol_plain;
        }

        const Eigen::VectorXd xminv =
            (xval.array() - cfg.move).max(0.0).matrix();
        const Eigen::VectorXd xmaxv =
            (xval.array() + cfg.move).min(1.0).matrix();
        Eigen::MatrixXd dfdx(1, act.size());
        dfdx.row(0) = gather(dvol_full, act).transpose();
        Eigen::VectorXd fval(1);
        fval[0] = vol;

        const Eigen::VectorXd xnew =
            mma.update(xval, compliance * normf, gather(dobj, act), fval,
                       dfdx, xminv, xmaxv);
        change = (xnew - xval).cwiseAbs().maxCoeff();
        xval = xnew;
        for (std::size_t i = 0; i < act.size(); ++i) x[act[i]] = xval[i];

        res.compliance_history.push_back(compliance);
        res.volfrac_history.push_back(xphys.mean());
        res.change_history.push_back(change);
        res.xphys = std::move(xphys);
        res.pressure = p;
        res.displacement = u;
        res.compliance = compliance;
        res.volume_constraint = vol;

        if (on_iteration)
            on_iteration(loop, compliance, res.volfrac_history.back(), change,
                         projecting ? proj.beta : 0.0);

        if (projecting) proj = continuation_step(loop, proj);
    }

    res.iterations = loop;
    res.converged = change <= cfg.change_tol;
    res.mnd_percent = grayness_measure(res.xphys);
    res.compliance_scaled = res.compliance_history.empty()
                                ? 0.0
                                : 1000.0 * res.compliance /
                                      res.compliance_history.front();
    return res;
}

std::pair<double, double> net_force(const ProblemSpec& spec,
                                    const RunConfig& cfg, bool drainage) {
    const Mesh& mesh = spec.mesh;
    MaterialParams mp =
        MaterialParams::make_defaults(cfg.penal, cfg.etaf, cfg.betaf);
    if (!drainage) mp.ds = 0.0;
    const ElementMatrices em = reference_element_matrices(mp.nu);

    // Validation fields are frozen designs: solid strips at 1, void
    // elsewhere (no filtering, no optimization).
    Eigen::VectorXd x = Eigen::VectorXd::Zero(mesh.num_elements());
    for (int e : spec.nds) x[e] = 1.0;

    const Eigen::SparseMatrix<double> a = assemble_flow(mesh, x, mp, em);
    const Eigen::VectorXd p = solve_pressure(a, spec.pressure_bc);
    const Eigen::SparseMatrix<double> t = assemble_transformation(mesh, em);
    const Eigen::VectorXd f = -(t * p);

    double mfx = 0.0, mfy = 0.0;
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        mfx += f[2 * n];
        mfy += f[2 * n + 1];
    }
    return {mfx, mfy};
}

} // namespace presstop
