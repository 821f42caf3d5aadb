#include "presstop/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "presstop/errors.hpp"
#include "presstop/filters.hpp"

namespace presstop {

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (out.fail())
        throw IoError("failed writing " + path.string());
}

} // namespace

void export_results(const OptResult& result, const ProblemSpec& spec,
                    const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " +
                      ec.message());

    const int nelx = spec.mesh.nelx();
    const int nely = spec.mesh.nely();

    {
        const fs::path path = dir / "convergence.csv";
        auto out = open_out(path);
        out << "iter,compliance,volfrac,change\n";
        for (std::size_t i = 0; i < result.compliance_history.size(); ++i)
            out << (i + 1) << ',' << fmt6(result.compliance_history[i]) << ','
                << fmt6(result.volfrac_history[i]) << ','
                << fmt6(result.change_history[i]) << '\n';
        finish(out, path);
    }

    {
        const fs::path path = dir / "density.csv";
        auto out = open_out(path);
        for (int r = 0; r < nely; ++r) {
            for (int c = 0; c < nelx; ++c) {
                if (c) out << ',';
                out << fmt6(result.xphys[spec.mesh.elem_id(r, c)]);
            }
            out << '\n';
        }
        finish(out, path);
    }

    {
        // P2 grayscale, solid material dark (0), void white (255).
        const fs::path path = dir / "density.pgm";
        auto out = open_out(path);
        out << "P2\n" << nelx << ' ' << nely << "\n255\n";
        for (int r = 0; r < nely; ++r) {
            for (int c = 0; c < nelx; ++c) {
                const double rho = result.xphys[spec.mesh.elem_id(r, c)];
                const int gray = static_cast<int>(
                    std::lround(255.0 * (1.0 - std::clamp(rho, 0.0, 1.0))));
                if (c) out << ' ';
                out << gray;
            }
            out << '\n';
        }
        finish(out, path);
    }

    {
        const fs::path path = dir / "pressure.csv";
        auto out = open_out(path);
        out << "node,x,y,p\n";
        for (int n = 0; n < spec.mesh.num_nodes(); ++n) {
            const int col = n / (nely + 1);
            const int row = n % (nely + 1);
            out << n << ',' << col << ',' << (nely - row) << ','
                << fmt6(result.pressure[n]) << '\n';
        }
        finish(out, path);
    }

    {
        const fs::path path = dir / "result.json";
        nlohmann::ordered_json j;
        j["problem"] = spec.name;
        j["nelx"] = nelx;
        j["nely"] = nely;
        j["compliance"] = result.compliance;
        j["compliance_scaled"] = result.compliance_scaled;
        j["iterations"] = result.iterations;
        j["converged"] = result.converged;
        j["mnd_percent"] = result.mnd_percent;
        j["volume_constraint"] = result.volume_constraint;

        nlohmann::ordered_json c;
        c["volfrac"] = cfg.volfrac;
        c["penal"] = cfg.penal;
        c["rmin"] = cfg.rmin;
        c["etaf"] = cfg.etaf;
        c["betaf"] = cfg.betaf;
        c["lst"] = cfg.lst;
        c["maxit"] = cfg.maxit;
        c["change_tol"] = cfg.change_tol;
        c["move"] = cfg.move;
        if (cfg.projection) {
            nlohmann::ordered_json pj;
            pj["beta"] = cfg.projection->beta;
            pj["betamax"] = cfg.projection->betamax;
            pj["eta"] = cfg.projection->eta;
            pj["period"] = cfg.projection->period;
            c["projection"] = pj;
        } else {
            c["projection"] = nullptr;
        }
        j["config"] = c;

        auto out = open_out(path);
        out << j.dump(2) << '\n';
        finish(out, path);
    }
}

} // namespace presstop
