#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "presstop/driver.hpp"
#include "presstop/errors.hpp"

namespace {

struct ConfigFile {
    std::map<std::string, std::string> values;
    // Directives like pressure.bottom=pin, kept in file order for the
    // custom-problem builder.
    std::vector<std::pair<std::string, std::string>> directives;
};

bool is_directive_key(const std::string& key) {
    for (const char* prefix : {"pressure.", "fix.", "solid.", "void."})
        if (key.rfind(prefix, 0) == 0) return true;
    return false;
}

std::string trim(std::string s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

ConfigFile read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw presstop::IoError("cannot read config file " + path);
    ConfigFile cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": empty key");
        if (is_directive_key(key))
            cfg.directives.emplace_back(key, val);
        else
            cfg.values[key] = val;
    }
    return cfg;
}

double to_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key +
                                    "' needs a number, got '" + val + "'");
    }
}

int to_int(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const int v = std::stoi(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key +
                                    "' needs an integer, got '" + val + "'");
    }
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "1" || val == "true" || val == "on" || val == "yes") return true;
    if (val == "0" || val == "false" || val == "off" || val == "no")
        return false;
    throw std::invalid_argument("config key '" + key +
                                "' needs a boolean, got '" + val + "'");
}

struct RunArgs {
    std::optional<std::string> problem;
    std::optional<int> nelx, nely, maxit, period;
    std::optional<double> volfrac, penal, rmin, etaf, betaf, betamax, proj_eta;
    std::optional<double> change_tol, move, pin;
    std::optional<bool> lst;
    std::string out_dir = "out";
    std::string config_path;
    bool quiet = false;
};

// Precedence: config file > command-line flag > per-problem default.
void apply_config_values(RunArgs& a, const ConfigFile& file) {
    for (const auto& [key, val] : file.values) {
        if (key == "problem")
            a.problem = val;
        else if (key == "nelx")
            a.nelx = to_int(key, val);
        else if (key == "nely")
            a.nely = to_int(key, val);
        else if (key == "volfrac")
            a.volfrac = to_double(key, val);
        else if (key == "penal")
            a.penal = to_double(key, val);
        else if (key == "rmin")
            a.rmin = to_double(key, val);
        else if (key == "etaf")
            a.etaf = to_double(key, val);
        else if (key == "betaf")
            a.betaf = to_double(key, val);
        else if (key == "lst")
            a.lst = to_bool(key, val);
        else if (key == "maxit")
            a.maxit = to_int(key, val);
        else if (key == "betamax")
            a.betamax = to_double(key, val);
        else if (key == "period")
            a.period = to_int(key, val);
        else if (key == "proj_eta")
            a.proj_eta = to_double(key, val);
        else if (key == "change_tol")
            a.change_tol = to_double(key, val);
        else if (key == "move")
            a.move = to_double(key, val);
        else if (key == "pin")
            a.pin = to_double(key, val);
        else if (key == "out")
            a.out_dir = val;
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

presstop::ProblemSpec build_problem(const RunArgs& a,
                                    const ConfigFile& file) {
    const std::string name = a.problem.value_or("");
    if (name.empty())
        throw std::invalid_argument("no problem selected (use --problem or "
                                    "a config file)");
    if (name == "custom") {
        if (!a.nelx || !a.nely)
            throw std::invalid_argument(
                "custom problems need explicit nelx and nely");
        if (file.directives.empty())
            throw std::invalid_argument(
                "custom problems need pressure./fix. directives in the "
                "config file");
        return presstop::make_custom_problem(*a.nelx, *a.nely,
                                             file.directives,
                                             a.pin.value_or(1.0));
    }
    if (!file.directives.empty())
        throw std::invalid_argument(
            "pressure./fix./solid./void. directives require problem=custom");
    return presstop::make_problem(name, a.nelx.value_or(0),
                                  a.nely.value_or(0));
}

presstop::RunConfig build_run_config(const RunArgs& a,
                                     const presstop::ProblemSpec& spec) {
    presstop::RunConfig cfg =
        presstop::RunConfig::from_defaults(spec.defaults);
    if (a.volfrac) cfg.volfrac = *a.volfrac;
    if (a.penal) cfg.penal = *a.penal;
    if (a.rmin) cfg.rmin = *a.rmin;
    if (a.etaf) cfg.etaf = *a.etaf;
    if (a.betaf) cfg.betaf = *a.betaf;
    if (a.lst) cfg.lst = *a.lst;
    if (a.maxit) cfg.maxit = *a.maxit;
    if (a.change_tol) cfg.change_tol = *a.change_tol;
    if (a.move) cfg.move = *a.move;
    if (a.betamax) {
        presstop::ProjectionParams proj;
        proj.beta = 1.0;
        proj.betamax = *a.betamax;
        if (a.period) proj.period = *a.period;
        if (a.proj_eta) proj.eta = *a.proj_eta;
        cfg.projection = proj;
    }
    return cfg;
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--problem", args.problem,
                    "Problem name (see list-problems) or 'custom'");
    cmd->add_option("--nelx", args.nelx, "Elements in x (0 = problem default)");
    cmd->add_option("--nely", args.nely, "Elements in y (0 = problem default)");
    cmd->add_option("--volfrac", args.volfrac, "Volume fraction upper bound");
    cmd->add_option("--penal", args.penal, "SIMP penalization exponent");
    cmd->add_option("--rmin", args.rmin, "Density filter radius (elements)");
    cmd->add_option("--etaf", args.etaf, "Flow Heaviside threshold");
    cmd->add_option("--betaf", args.betaf, "Flow Heaviside steepness");
    cmd->add_option("--lst", args.lst, "Include load sensitivities (bool)");
    cmd->add_option("--maxit", args.maxit, "Maximum MMA iterations");
    cmd->add_option("--betamax", args.betamax,
                    "Enable Heaviside projection with this terminal beta");
    cmd->add_option("--period", args.period,
                    "Projection continuation period (iterations)");
    cmd->add_option("--proj-eta", args.proj_eta, "Projection threshold");
    cmd->add_option("--change-tol", args.change_tol,
                    "Convergence tolerance on the design change");
    cmd->add_option("--move", args.move, "MMA external move limit");
    cmd->add_option("--pin", args.pin, "Input pressure for custom problems");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--config", args.config_path,
                    "key=value config file; overrides flags");
    cmd->add_flag("--quiet", args.quiet, "Suppress per-iteration output");
}

int run_command(const RunArgs& flag_args) {
    RunArgs args = flag_args;
    ConfigFile file;
    if (!args.config_path.empty()) {
        file = read_config(args.config_path);
        apply_config_values(args, file);
    }

    const presstop::ProblemSpec spec = build_problem(args, file);
    const presstop::RunConfig cfg = build_run_config(args, spec);

    presstop::IterationCallback cb;
    if (!args.quiet) {
        const bool projecting = cfg.projection.has_value();
        cb = [projecting](int iter, double c, double vol, double change,
                          double beta) {
            std::printf("it %4d  C %10.4f  vol %6.4f  change %6.4f", iter, c,
                        vol, change);
            if (projecting) std::printf("  beta %g", beta);
            std::printf("\n");
            std::fflush(stdout);
        };
    }

    const presstop::OptResult result = presstop::optimize(spec, cfg, cb);
    presstop::export_results(result, spec, cfg, args.out_dir);

    std::printf("%s: C = %.6g (raw %.6g) after %d iterations (%s), "
                "M_nd = %.4g%%, volume constraint = %.3g\n",
                spec.name.c_str(), result.compliance_scaled, result.compliance,
                result.iterations,
                result.converged ? "converged" : "iteration limit",
                result.mnd_percent, result.volume_constraint);
    std::printf("results written to %s\n", args.out_dir.c_str());
    return 0;
}

int validate_command(const RunArgs& flag_args, bool no_drainage) {
    RunArgs args = flag_args;
    ConfigFile file;
    if (!args.config_path.empty()) {
        file = read_config(args.config_path);
        apply_config_values(args, file);
    }
    const presstop::ProblemSpec spec = build_problem(args, file);
    const presstop::RunConfig cfg = build_run_config(args, spec);

    const auto [mfx, mfy] = presstop::net_force(spec, cfg, !no_drainage);
    std::printf("problem %s (%d x %d, drainage %s)\n", spec.name.c_str(),
                spec.mesh.nelx(), spec.mesh.nely(),
                no_drainage ? "off" : "on");
    std::printf("MFx = %.10g\n", mfx);
    std::printf("MFy = %.10g\n", mfy);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology optimization of structures carrying "
                 "design-dependent fluidic pressure loads"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run an optimization");
    add_run_options(run, run_args);

    RunArgs val_args;
    bool no_drainage = false;
    CLI::App* validate =
        app.add_subcommand("validate", "Solve a frozen validation field and "
                                       "print the net consistent load");
    add_run_options(validate, val_args);
    validate->add_flag("--no-drainage", no_drainage,
                       "Disable the drainage term");

    CLI::App* list =
        app.add_subcommand("list-problems", "List built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return run_command(run_args);
        if (validate->parsed()) return validate_command(val_args, no_drainage);
        if (list->parsed()) {
            for (const auto& name : presstop::problem_names())
                std::printf("%s\n", name.c_str());
            return 0;
        }
        return 2;
    } catch (const presstop::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 4;
    } catch (const presstop::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid arguments: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
