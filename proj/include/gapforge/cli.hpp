#pragma once

// Command line front end. `run` is callable in-process (tests use it) and
// returns the exit status: 0 ok, 2 bad input, 3 numerical failure. Errors are
// reported as one JSON object on the error stream.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gapforge/band_scan.hpp"
#include "gapforge/calibration.hpp"
#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/inverse_design.hpp"
#include "gapforge/io.hpp"
#include "gapforge/limit_model.hpp"

namespace gapforge::cli {

struct RunConfig {
    std::string command;
    std::string input;
    std::string out;
    std::string format = "json";
    double epsilon = 0.05;
    std::vector<double> epsilon_list{0.1, 0.05, 0.025, 0.0125};
    std::vector<int> grid;  // empty: 64 per direction for n = 1, 24 for n = 2
    int mesh = kDefaultMesh;
    int kmax = 6;
    double tol = 1e-6;
    int threads = 0;
};

inline void validate_config(const RunConfig& c) {
    if (c.input.empty()) throw InvalidInput("input path is empty", "input");
    if (!(c.tol > 0.0)) throw InvalidInput("tolerance must be positive", "tol");
    if (!(c.epsilon > 0.0)) throw InvalidInput("epsilon must be positive", "epsilon");
    if (c.mesh < 1) throw InvalidInput("mesh must be positive", "mesh");
    if (c.kmax < 1) throw InvalidInput("kmax must be positive", "kmax");
    if (c.threads < 0) throw InvalidInput("threads must be nonnegative", "threads");
    for (std::size_t i = 0; i < c.epsilon_list.size(); ++i) {
        if (!(c.epsilon_list[i] > 0.0)) throw InvalidInput("epsilons must be positive", "epsilon-list");
        if (i && !(c.epsilon_list[i] < c.epsilon_list[i - 1]))
            throw InvalidInput("epsilon list must be strictly decreasing", "epsilon-list");
    }
    for (int g : c.grid)
        if (g < 8) throw InvalidInput("grid counts must be at least 8", "grid");
}

inline json config_json(const RunConfig& c, const std::vector<int>& grid) {
    return json{{"command", c.command},
                {"input", c.input},
                {"out", c.out},
                {"format", c.format},
                {"epsilon", c.epsilon},
                {"epsilon_list", c.epsilon_list},
                {"grid", grid},
                {"mesh", c.mesh},
                {"kmax", c.kmax},
                {"tol", c.tol},
                {"richardson", c.tol < kRichardsonThreshold},
                {"threads", c.threads}};
}

namespace detail {

struct Loaded {
    InputSpec in;
    Decomposition d;
    ComponentStats stats;
    std::vector<int> grid;
};

inline Loaded load(const RunConfig& cfg) {
    Loaded L{load_input(cfg.input), {}, {}, {}};
    require_valid(L.in.cell);
    if (!L.in.decomposition) throw InvalidInput("a decomposition is required", "decomposition");
    L.d = *L.in.decomposition;
    require_valid(L.in.cell, L.d);
    L.stats = component_stats(L.in.cell, L.d);
    L.grid = cfg.grid.empty() ? default_grid_counts(L.in.cell.n) : cfg.grid;
    if (static_cast<int>(L.grid.size()) != L.in.cell.n)
        throw InvalidInput("grid needs one count per lattice direction", "grid");
    return L;
}

inline const GapTargets& require_targets(const Loaded& L) {
    if (!L.in.targets) throw InvalidInput("targets are required for this command", "targets");
    return *L.in.targets;
}

// Explicit couplings win; otherwise they are designed from the targets.
inline CouplingSpec couplings_for(const Loaded& L) {
    if (L.in.couplings) {
        validate_coupling(*L.in.couplings, L.d.m);
        return *L.in.couplings;
    }
    if (L.in.targets) return design(*L.in.targets, L.stats);
    throw InvalidInput("either couplings or targets must be given", "couplings");
}

inline ScanOptions scan_options(const RunConfig& cfg) {
    ScanOptions o;
    o.mesh = cfg.mesh;
    o.tolerance = cfg.tol;
    o.threads = cfg.threads;
    return o;
}

inline std::string csv_path(const std::string& out) {
    const std::string ext = ".json";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size()) + ".csv";
    return out + ".csv";
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + path + "'", "out");
    f << text;
}

inline void emit(const RunConfig& cfg, const json& doc, const std::optional<std::string>& csv, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    const bool want_json = cfg.format != "csv" || !csv;
    const bool want_csv = csv && cfg.format != "json";
    if (cfg.out.empty()) {
        if (want_json) out << text;
        if (want_csv) out << *csv;
        return;
    }
    if (want_json) write_file(cfg.out, text);
    if (want_csv) write_file(want_json ? csv_path(cfg.out) : cfg.out, *csv);
}

inline json endpoints_or_null(const BandStructure& bs, int m, json& note) {
    try {
        return to_json(gap_endpoints(bs, m));
    } catch (const GapCountMismatch& e) {
        note = e.what();
        return nullptr;
    }
}

}  // namespace detail

inline void execute(const RunConfig& cfg, std::ostream& out) {
    validate_config(cfg);
    const auto L = detail::load(cfg);
    json doc;
    doc["config"] = config_json(cfg, L.grid);
    doc["stats"] = to_json(L.stats);
    std::optional<std::string> csv;
    const auto opt = detail::scan_options(cfg);

    if (cfg.command == "limit") {
        if (!L.in.couplings) throw InvalidInput("couplings are required for this command", "couplings");
        const auto& c = *L.in.couplings;
        const auto e = limit_endpoints(L.stats, c);
        doc["couplings"] = to_json(c);
        doc["A"] = e.A;
        doc["B"] = e.B;
        doc["B_matrix"] = limit_B_matrix(assemble_limit_matrix(L.stats, c));
        doc["interlaced"] = interlaced(e.A, e.B);
    } else if (cfg.command == "design") {
        const auto& t = detail::require_targets(L);
        const auto shifted = shift_for_zero_target(t);
        const auto c = design(shifted.targets, L.stats);
        const auto rt = verify_design(shifted.targets, L.stats, c);
        doc["targets"] = {{"A", t.A}, {"B", t.B}};
        doc["potential_shift"] = shifted.shift;
        doc["couplings"] = to_json(c);
        doc["weights_r"] = weights_r(shifted.targets);
        doc["roundtrip"] = {{"ok", rt.ok},
                            {"A", rt.forward.A},
                            {"B", rt.forward.B},
                            {"max_rel_error_A", rt.max_rel_error_A},
                            {"max_rel_error_B", rt.max_rel_error_B}};
    } else if (cfg.command == "bands") {
        const auto c = detail::couplings_for(L);
        const auto bs = bands(L.in.cell, L.d, c, cfg.epsilon, cfg.kmax, L.grid, opt);
        json note = nullptr;
        doc["couplings"] = to_json(c);
        doc["band_structure"] = to_json(bs);
        doc["endpoints"] = detail::endpoints_or_null(bs, L.d.m, note);
        doc["endpoints_note"] = note;
        csv = bands_csv(bs);
    } else if (cfg.command == "lambda0") {
        const auto r = lambda0(L.in.cell, L.d, opt);
        doc["lambda0"] = r.value;
        doc["y0_antiperiodic"] = r.y0_antiperiodic;
        doc["neumann_second"] = r.neumann_second;
    } else if (cfg.command == "convergence") {
        const auto c = detail::couplings_for(L);
        const auto r = convergence_study(L.in.cell, L.d, c, cfg.epsilon_list, L.grid, opt);
        doc["couplings"] = to_json(c);
        doc["report"] = to_json(r);
        csv = convergence_csv(r);
    } else if (cfg.command == "calibrate") {
        const auto& t = detail::require_targets(L);
        const auto c = design(t, L.stats);
        CalibrationProblem p{L.in.cell, L.d, c.beta, c.gamma, cfg.epsilon, L.grid, opt};
        const auto box = make_calibration_box(c.alpha, c.beta, L.stats);
        const auto r = calibrate(t.A, p, box, cfg.tol);
        doc["targets"] = {{"A", t.A}, {"B", t.B}};
        doc["designed"] = to_json(c);
        doc["calibration"] = to_json(r);
        doc["couplings"] = to_json(CouplingSpec{r.alpha, c.beta, c.gamma});
    } else {
        throw InvalidInput("unknown command '" + cfg.command + "'", "command");
    }
    detail::emit(cfg, doc, csv, out);
}

inline json error_json(const std::string& code, const std::string& kind, const std::string& message,
                       const std::string& field) {
    return json{{"error", {{"code", code}, {"kind", kind}, {"message", message}, {"field", field}}}};
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Band structures and gap design for periodic quantum graphs", "gapforge"};
    app.require_subcommand(1, 1);
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"limit", "limit gap endpoints A, B for given couplings"},
        {"design", "couplings realising target gap endpoints"},
        {"bands", "band structure and gaps at one epsilon"},
        {"lambda0", "window constant Lambda0"},
        {"convergence", "gap endpoints against their limits over a list of epsilons"},
        {"calibrate", "adjust alpha so the band tops match the targets at one epsilon"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--input,-i", cfg.input, "graph spec (JSON)")->required();
        sub->add_option("--out,-o", cfg.out, "output path (default: stdout)");
        sub->add_option("--epsilon", cfg.epsilon, "scale parameter");
        sub->add_option("--epsilon-list", cfg.epsilon_list, "decreasing epsilons, comma separated")->delimiter(',');
        sub->add_option("--grid", cfg.grid, "theta grid points per direction, comma separated")->delimiter(',');
        sub->add_option("--mesh", cfg.mesh, "finite elements per unit length");
        sub->add_option("--kmax", cfg.kmax, "number of bands");
        sub->add_option("--tol", cfg.tol, "tolerance; below 1e-6 eigenvalues are extrapolated");
        sub->add_option("--threads", cfg.threads, "worker threads (default GAPFORGE_THREADS or all cores)");
        sub->add_option("--format", cfg.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
        sub->callback([&cfg, name = name] { cfg.command = name; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("UsageError", "validation", e.what(), "").dump() << "\n";
        return 2;
    }
    try {
        execute(cfg, out);
        return 0;
    } catch (const Error& e) {
        const bool validation = e.kind() == ErrorKind::validation;
        err << error_json(e.code(), validation ? "validation" : "numerical", e.what(), e.field()).dump() << "\n";
        return validation ? 2 : 3;
    } catch (const nlohmann::json::exception& e) {
        err << error_json("InvalidInput", "validation", e.what(), "input").dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << error_json("InternalError", "numerical", e.what(), "").dump() << "\n";
        return 3;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace gapforge::cli
