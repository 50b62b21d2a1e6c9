#pragma once

// Graph spec files (JSON) and the JSON/CSV renderings of results.
//
// Input layout:
//   { "n": 1,
//     "vertices": [{"id": "v", "kind": "interior"|"boundary"}, ...],
//     "edges": [{"id": "e0", "from": "b0", "to": "v", "length": "0.5"}, ...],
//     "boundary_pairs": [{"v": "b0", "w": "b1", "shift": [1]}, ...],
//     "decomposition": {"m": 1, "edge_component": {"e4": 1, ...}, "tilde_v": "c"},
//     "couplings": {"alpha": [...], "beta": [...], "gamma": 0},      optional
//     "targets": {"A": [...], "B": [...]} }                           optional
// Numbers may be given as JSON numbers or decimal strings.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "gapforge/band_scan.hpp"
#include "gapforge/calibration.hpp"
#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/inverse_design.hpp"
#include "gapforge/limit_model.hpp"

namespace gapforge {

using json = nlohmann::ordered_json;

struct InputSpec {
    PeriodCell cell;
    std::optional<Decomposition> decomposition;
    std::optional<CouplingSpec> couplings;
    std::optional<GapTargets> targets;
};

namespace detail {

inline const json& require_key(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw InvalidInput("expected an object", where);
    auto it = j.find(key);
    if (it == j.end()) throw InvalidInput("missing key '" + key + "'", where.empty() ? key : where + "." + key);
    return *it;
}

inline double read_number(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        double x = 0.0;
        const auto* first = s.data();
        const auto* last = s.data() + s.size();
        while (first < last && *first == ' ') ++first;
        if (first < last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, x);
        if (ec == std::errc() && ptr == last && std::isfinite(x)) return x;
        throw InvalidInput("'" + s + "' is not a decimal number", field);
    }
    throw InvalidInput("expected a number or decimal string", field);
}

inline int read_int(const json& j, const std::string& field) {
    if (j.is_number_integer()) return j.get<int>();
    const double x = read_number(j, field);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw InvalidInput("expected an integer", field);
    return static_cast<int>(x);
}

inline std::string read_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw InvalidInput("expected a string", field);
    return j.get<std::string>();
}

inline std::vector<double> read_numbers(const json& j, const std::string& field) {
    if (!j.is_array()) throw InvalidInput("expected an array", field);
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

inline const json& require_array(const json& j, const std::string& key) {
    const auto& a = require_key(j, key, "");
    if (!a.is_array()) throw InvalidInput("expected an array", key);
    return a;
}

}  // namespace detail

inline InputSpec parse_input(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw InvalidInput("top level must be an object", "input");
    InputSpec in;
    in.cell.n = read_int(require_key(j, "n", ""), "n");
    const auto& verts = require_array(j, "vertices");
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::string at = "vertices[" + std::to_string(i) + "]";
        Vertex v;
        v.id = read_string(require_key(verts[i], "id", at), at + ".id");
        const std::string kind = verts[i].contains("kind") ? read_string(verts[i]["kind"], at + ".kind") : "interior";
        if (kind == "interior")
            v.kind = VertexKind::interior;
        else if (kind == "boundary")
            v.kind = VertexKind::boundary;
        else
            throw InvalidInput("kind must be 'interior' or 'boundary'", at + ".kind");
        in.cell.vertices.push_back(v);
    }
    const auto& edges = require_array(j, "edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string at = "edges[" + std::to_string(i) + "]";
        Edge e;
        e.id = read_string(require_key(edges[i], "id", at), at + ".id");
        e.from = read_string(require_key(edges[i], "from", at), at + ".from");
        e.to = read_string(require_key(edges[i], "to", at), at + ".to");
        e.length = read_number(require_key(edges[i], "length", at), at + ".length");
        in.cell.edges.push_back(e);
    }
    const auto& pairs = require_array(j, "boundary_pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string at = "boundary_pairs[" + std::to_string(i) + "]";
        BoundaryPair p;
        p.v = read_string(require_key(pairs[i], "v", at), at + ".v");
        p.w = read_string(require_key(pairs[i], "w", at), at + ".w");
        const auto& s = require_key(pairs[i], "shift", at);
        if (!s.is_array()) throw InvalidInput("expected an array", at + ".shift");
        for (std::size_t k = 0; k < s.size(); ++k)
            p.shift.push_back(read_int(s[k], at + ".shift[" + std::to_string(k) + "]"));
        in.cell.boundary_pairs.push_back(p);
    }
    if (j.contains("decomposition")) {
        const auto& dj = j["decomposition"];
        Decomposition d;
        d.m = read_int(require_key(dj, "m", "decomposition"), "decomposition.m");
        const auto& ec = require_key(dj, "edge_component", "decomposition");
        if (!ec.is_object()) throw InvalidInput("expected an object", "decomposition.edge_component");
        for (const auto& [id, comp] : ec.items())
            d.edge_component[id] = read_int(comp, "decomposition.edge_component." + id);
        d.tilde_v = read_string(require_key(dj, "tilde_v", "decomposition"), "decomposition.tilde_v");
        in.decomposition = d;
    }
    if (j.contains("couplings")) {
        const auto& cj = j["couplings"];
        CouplingSpec c;
        c.alpha = read_numbers(require_key(cj, "alpha", "couplings"), "couplings.alpha");
        c.beta = read_numbers(require_key(cj, "beta", "couplings"), "couplings.beta");
        c.gamma = read_number(require_key(cj, "gamma", "couplings"), "couplings.gamma");
        in.couplings = c;
    }
    if (j.contains("targets")) {
        const auto& tj = j["targets"];
        GapTargets t;
        t.A = read_numbers(require_key(tj, "A", "targets"), "targets.A");
        t.B = read_numbers(require_key(tj, "B", "targets"), "targets.B");
        in.targets = t;
    }
    return in;
}

inline InputSpec load_input(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open '" + path + "'", "input");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("malformed JSON: ") + e.what(), "input");
    }
    return parse_input(j);
}

// Shortest round-trip decimal form, independent of locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline json to_json(const CouplingSpec& c) { return json{{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}}; }

inline json to_json(const ComponentStats& st) { return json{{"l", st.l}, {"N", st.N}}; }

inline json to_json(const GapEndpoints& g) { return json{{"B0", g.B0}, {"A", g.A}, {"B", g.B}}; }

inline json to_json(const BandStructure& bs) {
    json bands = json::array();
    for (std::size_t k = 0; k < bs.bands.size(); ++k)
        bands.push_back({{"k", k + 1}, {"min", bs.bands[k].min}, {"max", bs.bands[k].max},
                         {"grid_jump", bs.grid_jump[k]}});
    json gaps = json::array();
    for (const auto& g : bs.gaps)
        gaps.push_back({{"lower", g.lower}, {"upper", g.upper}, {"band_below", g.band_below}, {"band_above", g.band_above}});
    return json{{"epsilon", bs.epsilon},
                {"k_max", bs.k_max},
                {"bands_computed", bs.bands.size()},
                {"lambda0", bs.lambda0},
                {"window_top", bs.window_top},
                {"window_covered", bs.window_covered},
                {"tol_gap", bs.tol_gap},
                {"mesh", bs.mesh},
                {"richardson", bs.richardson},
                {"grid", {{"counts", bs.grid_counts}, {"points", bs.theta_phases.size()}}},
                {"bands", bands},
                {"gaps", gaps}};
}

// k, theta_index, theta_1..theta_n (phase angles in radians), lambda
inline std::string bands_csv(const BandStructure& bs) {
    std::ostringstream os;
    os << "k,theta_index";
    for (std::size_t d = 0; d < bs.grid_counts.size(); ++d) os << ",theta_" << d + 1;
    os << ",lambda\n";
    for (std::size_t k = 0; k < bs.bands.size(); ++k)
        for (std::size_t i = 0; i < bs.theta_phases.size(); ++i) {
            os << k + 1 << ',' << i;
            for (double p : bs.theta_phases[i]) os << ',' << format_double(p);
            os << ',' << format_double(bs.eigenvalues[i][k]) << '\n';
        }
    return os.str();
}

inline json to_json(const ConvergenceReport& r) {
    json fits = json::array();
    for (const auto& f : r.fits) {
        json slope = std::isfinite(f.slope) ? json(f.slope) : json(nullptr);
        fits.push_back({{"endpoint", f.name}, {"slope", slope}, {"C", f.C}, {"exact", f.exact}});
    }
    json endpoints = json::array();
    for (const auto& g : r.endpoints) endpoints.push_back(to_json(g));
    return json{{"limit", {{"A", r.limit.A}, {"B", r.limit.B}}},
                {"lambda0", r.lambda0},
                {"tol_one_sided", r.tol_one_sided},
                {"epsilons", r.epsilons},
                {"excluded", r.excluded},
                {"endpoints", endpoints},
                {"errors_A", r.errors_A},
                {"errors_B", r.errors_B},
                {"fits", fits},
                {"one_sided", r.one_sided},
                {"monotone", r.monotone}};
}

// endpoint, epsilon, error, log_epsilon, log_error (empty when error <= 0)
inline std::string convergence_csv(const ConvergenceReport& r) {
    std::ostringstream os;
    os << "endpoint,epsilon,error,log_epsilon,log_error\n";
    auto row = [&](const std::string& name, double eps, double err) {
        os << name << ',' << format_double(eps) << ',' << format_double(err) << ',' << format_double(std::log(eps)) << ',';
        if (err > 0.0) os << format_double(std::log(err));
        os << '\n';
    };
    const std::size_t m = r.limit.A.size();
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < r.epsilons.size(); ++i) row("A" + std::to_string(j + 1), r.epsilons[i], r.errors_A[i][j]);
    for (std::size_t j = 0; j <= m; ++j)
        for (std::size_t i = 0; i < r.epsilons.size(); ++i) row("B" + std::to_string(j), r.epsilons[i], r.errors_B[i][j]);
    return os.str();
}

inline json to_json(const CalibrationResult& r) {
    return json{{"alpha", r.alpha},
                {"F", r.F},
                {"residuals", r.residuals},
                {"max_residual", r.max_residual()},
                {"residuals_doubled_grid", r.residuals_doubled},
                {"max_residual_doubled_grid", r.residuals_doubled.empty() ? json(nullptr) : json(r.max_residual_doubled())},
                {"box", {{"center", r.box.center}, {"half_width", r.box.half_width}}},
                {"F_minus", r.F_minus},
                {"F_plus", r.F_plus},
                {"sweeps", r.sweeps},
                {"evaluations", r.evaluations},
                {"converged", r.converged}};
}

}  // namespace gapforge
