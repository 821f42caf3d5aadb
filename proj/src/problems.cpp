#include "presstop/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace presstop {

namespace {

void require_divisible(int value, int divisor, const char* problem,
                       const char* dim) {
    if (value % divisor != 0)
        throw std::invalid_argument(std::string(problem) + ": " + dim +
                                    " must be divisible by " +
                                    std::to_string(divisor));
}

void fix_bottom_corners(ProblemSpec& spec) {
    const Mesh& m = spec.mesh;
    spec.structural_bc.fix_node(m.node_id(m.nely(), 0), true, true);
    spec.structural_bc.fix_node(m.node_id(m.nely(), m.nelx()), true, true);
}

void set_nodes(PressureBc& bc, const std::vector<int>& nodes, double value) {
    for (int n : nodes) bc.set(n, value);
}

// Solid horizontal strips for the validation fields: num_strips bars of
// max(1, nely/20) element rows, evenly spaced over the height, full width.
ProblemSpec make_validation_field(const std::string& name, int nelx, int nely,
                                  int num_strips) {
    ProblemSpec spec(name, nelx, nely);
    const Mesh& m = spec.mesh;

    // Prescribe only the top and bottom edges; the sides keep the natural
    // zero-flux condition, so the exact field is one-dimensional in y.
    set_nodes(spec.pressure_bc, m.top_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.bottom_nodes(), spec.pin);

    const int width = std::max(1, nely / 20);
    for (int k = 1; k <= num_strips; ++k) {
        const int r0 = nely * k / (num_strips + 1);
        if (r0 + width > nely)
            throw std::invalid_argument(name +
                                        ": mesh too coarse for strip layout");
        for (int r = r0; r < r0 + width; ++r)
            for (int c = 0; c < nelx; ++c)
                spec.nds.push_back(m.elem_id(r, c));
    }
    std::sort(spec.nds.begin(), spec.nds.end());

    fix_bottom_corners(spec);
    return spec;
}

ProblemSpec make_arch(int nelx, int nely) {
    ProblemSpec spec("arch", nelx, nely);
    const Mesh& m = spec.mesh;
    set_nodes(spec.pressure_bc, m.top_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.left_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.right_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.bottom_nodes(), spec.pin);
    fix_bottom_corners(spec);
    return spec;
}

ProblemSpec make_bridge(int nelx, int nely) {
    ProblemSpec spec("bridge", nelx, nely);
    const Mesh& m = spec.mesh;
    set_nodes(spec.pressure_bc, m.bottom_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.top_nodes(), spec.pin);
    fix_bottom_corners(spec);
    for (int n : m.left_nodes()) spec.structural_bc.fix_node(n, true, false);
    for (int n : m.right_nodes()) spec.structural_bc.fix_node(n, true, false);
    return spec;
}

ProblemSpec make_ext_arch(int nelx, int nely) {
    require_divisible(nelx, 10, "ext_arch", "nelx");
    ProblemSpec spec("ext_arch", nelx, nely);
    const Mesh& m = spec.mesh;
    const int w = nelx / 10;

    set_nodes(spec.pressure_bc, m.top_nodes(), spec.pin);
    set_nodes(spec.pressure_bc, m.left_nodes(), spec.pin);
    set_nodes(spec.pressure_bc, m.right_nodes(), spec.pin);
    // Pressurized bottom shoulders: node columns [0, w-1] and [nelx-w, nelx];
    // the span between them is vented to zero.
    for (int c = 0; c < w; ++c)
        spec.pressure_bc.set(m.node_id(nely, c), spec.pin);
    for (int c = nelx - w; c <= nelx; ++c)
        spec.pressure_bc.set(m.node_id(nely, c), spec.pin);
    for (int c = w; c <= nelx - w - 1; ++c)
        spec.pressure_bc.set(m.node_id(nely, c), 0.0);

    spec.structural_bc.fix_node(m.node_id(nely, w), true, true);
    spec.structural_bc.fix_node(m.node_id(nely, nelx - w - 1), true, true);
    return spec;
}

ProblemSpec make_piston(int nelx, int nely) {
    ProblemSpec spec("piston", nelx, nely);
    const Mesh& m = spec.mesh;
    set_nodes(spec.pressure_bc, m.bottom_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.top_nodes(), spec.pin);
    const int mid = (nelx + 2) / 2 - 1;  // ceil((nelx+1)/2), zero-based
    spec.structural_bc.fix_node(m.node_id(nely, mid), true, true);
    for (int n : m.left_nodes()) spec.structural_bc.fix_node(n, true, false);
    for (int n : m.right_nodes()) spec.structural_bc.fix_node(n, true, false);
    return spec;
}

void collect_rect(const Mesh& m, int r0, int r1, int c0, int c1,
                  std::vector<int>& out) {
    for (int c = c0; c <= c1; ++c)
        for (int r = r0; r <= r1; ++r)
            out.push_back(m.elem_id(r, c));
}

ProblemSpec make_chamber(int nelx, int nely) {
    require_divisible(nelx, 15, "chamber", "nelx");
    require_divisible(nely, 40, "chamber", "nely");
    ProblemSpec spec("chamber", nelx, nely);
    const Mesh& m = spec.mesh;

    // Chamber walls: two solid bars reaching the right edge, with void
    // regions forming the pressurized cavity between and below them.
    // Element rows/cols below are the slice bounds, zero-based inclusive.
    const int sr_c0 = 2 * nelx / 3 - 1, sr_c1 = nelx - 1;
    const int s1_r0 = 3 * nely / 8 - 1, s1_r1 = 17 * nely / 40 - 1;
    const int s2_r0 = 23 * nely / 40 - 1, s2_r1 = 5 * nely / 8 - 1;
    const int v1_r0 = 17 * nely / 40 - 1, v1_r1 = nely - 1;
    const int v1_c0 = 7 * nelx / 15 - 1, v1_c1 = 8 * nelx / 15 - 1;
    const int v2_r0 = 17 * nely / 40 - 1, v2_r1 = 23 * nely / 40 - 1;
    const int v2_c0 = 8 * nelx / 15 - 1, v2_c1 = nelx - 1;

    std::vector<int> nds, ndv;
    collect_rect(m, s1_r0, s1_r1, sr_c0, sr_c1, nds);
    collect_rect(m, s2_r0, s2_r1, sr_c0, sr_c1, nds);
    collect_rect(m, v1_r0, v1_r1, v1_c0, v1_c1, ndv);
    collect_rect(m, v2_r0, v2_r1, v2_c0, v2_c1, ndv);

    std::sort(ndv.begin(), ndv.end());
    ndv.erase(std::unique(ndv.begin(), ndv.end()), ndv.end());
    std::sort(nds.begin(), nds.end());
    nds.erase(std::unique(nds.begin(), nds.end()), nds.end());
    // Where a bar slice touches the cavity the void assignment wins, matching
    // the order the overrides are applied in.
    std::vector<int> nds_eff;
    std::set_difference(nds.begin(), nds.end(), ndv.begin(), ndv.end(),
                        std::back_inserter(nds_eff));
    spec.nds = std::move(nds_eff);
    spec.ndv = std::move(ndv);

    set_nodes(spec.pressure_bc, m.top_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.left_nodes(), 0.0);
    set_nodes(spec.pressure_bc, m.right_nodes(), 0.0);
    std::set<int> cavity_nodes;
    for (int e : spec.ndv)
        for (int n : m.pdofs(e)) cavity_nodes.insert(n);
    for (int n : cavity_nodes) spec.pressure_bc.set(n, spec.pin);
    set_nodes(spec.pressure_bc, m.bottom_nodes(), spec.pin);

    fix_bottom_corners(spec);
    // The rightmost column of each bar is clamped.
    std::set<int> fixx;
    for (int r = s1_r0; r <= s1_r1; ++r)
        for (int n : m.pdofs(m.elem_id(r, nelx - 1))) fixx.insert(n);
    for (int r = s2_r0; r <= 25 * nely / 40 - 1; ++r)
        for (int n : m.pdofs(m.elem_id(r, nelx - 1))) fixx.insert(n);
    for (int n : fixx) spec.structural_bc.fix_node(n, true, true);

    return spec;
}

struct NamedDefaults {
    const char* name;
    ProblemDefaults d;
};

const NamedDefaults kDefaults[] = {
    {"sp1", {200, 200, 0.3, 3, 2.4, 0.2, 8, true, 100}},
    {"sp2", {200, 200, 0.3, 3, 2.4, 0.2, 8, true, 100}},
    {"sp3", {200, 200, 0.3, 3, 2.4, 0.2, 8, true, 100}},
    {"arch", {200, 100, 0.3, 3, 2.4, 0.2, 8, true, 100}},
    {"bridge", {200, 100, 0.2, 3, 2.5, 0.2, 10, true, 150}},
    {"ext_arch", {200, 100, 0.2, 3, 4.0, 0.15, 8, true, 100}},
    {"piston", {300, 100, 0.2, 3, 2.4, 0.1, 8, true, 150}},
    {"chamber", {300, 200, 0.2, 3, 6.0, 0.1, 10, true, 200}},
};

} // namespace

const std::vector<std::string>& problem_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& nd : kDefaults) v.emplace_back(nd.name);
        return v;
    }();
    return names;
}

ProblemSpec make_problem(const std::string& name, int nelx, int nely) {
    const NamedDefaults* found = nullptr;
    for (const auto& nd : kDefaults)
        if (name == nd.name) {
            found = &nd;
            break;
        }
    if (!found)
        throw std::invalid_argument("unknown problem '" + name + "'");

    if (nelx == 0) nelx = found->d.nelx;
    if (nely == 0) nely = found->d.nely;
    if (nelx < 1 || nely < 1)
        throw std::invalid_argument("mesh dimensions must be positive");

    ProblemSpec spec = [&]() -> ProblemSpec {
        if (name == "sp1") return make_validation_field(name, nelx, nely, 0);
        if (name == "sp2") return make_validation_field(name, nelx, nely, 2);
        if (name == "sp3") return make_validation_field(name, nelx, nely, 3);
        if (name == "arch") return make_arch(nelx, nely);
        if (name == "bridge") return make_bridge(nelx, nely);
        if (name == "ext_arch") return make_ext_arch(nelx, nely);
        if (name == "piston") return make_piston(nelx, nely);
        return make_chamber(nelx, nely);
    }();
    spec.defaults = found->d;
    spec.defaults.nelx = nelx;
    spec.defaults.nely = nely;
    return spec;
}

namespace {

std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

double parse_fraction(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || v < 0.0 || v > 1.0)
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid fraction '" + s + "' in " + what);
    }
}

// "edge" or "edge[f0:f1]" -> edge name + fractional span along the edge.
void parse_edge_span(const std::string& token, std::string& edge, double& f0,
                     double& f1) {
    f0 = 0.0;
    f1 = 1.0;
    const auto lb = token.find('[');
    if (lb == std::string::npos) {
        edge = token;
        return;
    }
    if (token.back() != ']')
        throw std::invalid_argument("unterminated span in '" + token + "'");
    edge = token.substr(0, lb);
    const std::string span = token.substr(lb + 1, token.size() - lb - 2);
    const auto colon = span.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("span must be f0:f1 in '" + token + "'");
    f0 = parse_fraction(trim(span.substr(0, colon)), token);
    f1 = parse_fraction(trim(span.substr(colon + 1)), token);
    if (f1 < f0)
        throw std::invalid_argument("empty span in '" + token + "'");
}

// Nodes of one boundary edge with their fractional coordinate along it
// (left-to-right for top/bottom, bottom-to-top for left/right).
std::vector<std::pair<int, double>> edge_nodes(const Mesh& m,
                                               const std::string& edge) {
    std::vector<std::pair<int, double>> out;
    if (edge == "top" || edge == "bottom") {
        const int row = (edge == "top") ? 0 : m.nely();
        for (int c = 0; c <= m.nelx(); ++c)
            out.emplace_back(m.node_id(row, c), double(c) / m.nelx());
    } else if (edge == "left" || edge == "right") {
        const int col = (edge == "left") ? 0 : m.nelx();
        for (int r = 0; r <= m.nely(); ++r)
            out.emplace_back(m.node_id(r, col), double(m.nely() - r) / m.nely());
    } else {
        throw std::invalid_argument("unknown edge '" + edge + "'");
    }
    return out;
}

} // namespace

ProblemSpec make_custom_problem(
    int nelx, int nely,
    const std::vector<std::pair<std::string, std::string>>& directives,
    double pin) {
    ProblemSpec spec("custom", nelx, nely);
    spec.pin = pin;
    const Mesh& m = spec.mesh;
    const double eps = 1e-9;

    std::set<int> nds, ndv;
    for (const auto& [rawkey, rawval] : directives) {
        const std::string key = trim(rawkey);
        const std::string val = trim(rawval);
        const auto dot = key.find('.');
        if (dot == std::string::npos)
            throw std::invalid_argument("malformed problem directive '" + key +
                                        "'");
        const std::string kind = key.substr(0, dot);
        const std::string rest = key.substr(dot + 1);

        if (kind == "pressure" || kind == "fix") {
            std::string edge;
            double f0, f1;
            parse_edge_span(rest, edge, f0, f1);
            for (const auto& [node, frac] : edge_nodes(m, edge)) {
                if (frac < f0 - eps || frac > f1 + eps) continue;
                if (kind == "pressure") {
                    if (val == "free") {
                        spec.pressure_bc.fixed[node] = 0;
                        spec.pressure_bc.values[node] = 0.0;
                    } else if (val == "pin") {
                        spec.pressure_bc.set(node, pin);
                    } else {
                        try {
                            size_t pos = 0;
                            const double v = std::stod(val, &pos);
                            if (pos != val.size())
                                throw std::invalid_argument("");
                            spec.pressure_bc.set(node, v);
                        } catch (const std::exception&) {
                            throw std::invalid_argument(
                                "invalid pressure value '" + val + "'");
                        }
                    }
                } else {
                    if (val != "x" && val != "y" && val != "xy")
                        throw std::invalid_argument(
                            "fix value must be x, y or xy, got '" + val + "'");
                    spec.structural_bc.fix_node(
                        node, val == "x" || val == "xy",
                        val == "y" || val == "xy");
                }
            }
        } else if ((kind == "solid" || kind == "void") && rest == "rect") {
            // x0,y0,x1,y1 as domain fractions, y measured up from the bottom.
            std::vector<double> f;
            std::string token;
            for (std::size_t i = 0; i <= val.size(); ++i) {
                if (i == val.size() || val[i] == ',') {
                    f.push_back(parse_fraction(trim(token), key));
                    token.clear();
                } else {
                    token += val[i];
                }
            }
            if (f.size() != 4 || f[2] < f[0] || f[3] < f[1])
                throw std::invalid_argument("rect needs x0,y0,x1,y1 with "
                                            "x0<=x1 and y0<=y1");
            auto& target = (kind == "solid") ? nds : ndv;
            for (int e = 0; e < m.num_elements(); ++e) {
                const double cx = (m.elem_col(e) + 0.5) / m.nelx();
                const double cy = (m.nely() - m.elem_row(e) - 0.5) / m.nely();
                if (cx >= f[0] - eps && cx <= f[2] + eps && cy >= f[1] - eps &&
                    cy <= f[3] + eps)
                    target.insert(e);
            }
        } else {
            throw std::invalid_argument("unknown problem directive '" + key +
                                        "'");
        }
    }

    for (int e : ndv) nds.erase(e);
    spec.nds.assign(nds.begin(), nds.end());
    spec.ndv.assign(ndv.begin(), ndv.end());

    bool any_fixed_pressure = false;
    for (auto f : spec.pressure_bc.fixed) any_fixed_pressure |= (f != 0);
    if (!any_fixed_pressure)
        throw std::invalid_argument("custom problem fixes no pressure node");
    int fixed_udofs = 0;
    for (auto f : spec.structural_bc.fixed) fixed_udofs += (f != 0);
    if (fixed_udofs < 3)
        throw std::invalid_argument("custom problem needs at least three "
                                    "fixed displacement DOFs");
    return spec;
}

} // namespace presstop
