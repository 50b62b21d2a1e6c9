// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gapforge/gapforge.hpp"

using namespace gapforge;
using namespace gapforge::catalog;

namespace {

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

const CouplingSpec kDesigned{{0.5}, {1.0}, 0.0};
const GapTargets kTargets{{1.0}, {0.0, 1.5}};

Outcome limit_oracle() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> len(0.2, 3.0), coef(0.2, 3.0), u(0.0, 1.0), gam(-2.0, 2.0);
    std::uniform_int_distribution<int> cnt(1, 4);
    double worst = 0.0;
    int done = 0, not_interlaced = 0;
    while (done < 100) {
        const int m = 1 + done % 3;
        ComponentStats st{{len(rng)}, {}};
        CouplingSpec c;
        for (int j = 0; j < m; ++j) {
            st.l.push_back(len(rng));
            st.N.push_back(cnt(rng));
            c.alpha.push_back((u(rng) < 0.2 ? -1 : 1) * coef(rng));
            c.beta.push_back((u(rng) < 0.5 ? -1 : 1) * coef(rng));
        }
        c.gamma = gam(rng);
        LimitEndpoints e;
        try {
            e = limit_endpoints(st, c);
        } catch (const DegenerateA&) {
            continue;
        }
        const auto Bm = limit_B_matrix(assemble_limit_matrix(st, c));
        double scale = 1.0;
        for (double b : Bm) scale = std::max(scale, std::abs(b));
        for (std::size_t i = 0; i < Bm.size(); ++i) worst = std::max(worst, std::abs(Bm[i] - e.B[i]) / scale);
        if (!interlaced(e.A, e.B)) ++not_interlaced;
        ++done;
    }
    return {worst <= 1e-8 && not_interlaced == 0,
            "max rel diff " + sci(worst) + ", not interlaced " + std::to_string(not_interlaced)};
}

Outcome design_roundtrip() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> step(0.05, 2.0), start(-3.0, 3.0), len(0.2, 3.0);
    std::uniform_int_distribution<int> cnt(1, 4);
    double worst = 0.0;
    int bad_radicand = 0, done = 0;
    while (done < 100) {
        const int m = 1 + done % 3;
        std::vector<double> seq{start(rng)};
        for (int i = 0; i < 2 * m; ++i) seq.push_back(seq.back() + step(rng));
        GapTargets t;
        t.B.push_back(seq[0]);
        bool zero = false;
        for (int j = 0; j < m; ++j) {
            t.A.push_back(seq[2 * j + 1]);
            t.B.push_back(seq[2 * j + 2]);
            zero = zero || std::abs(t.A.back()) < 1e-3;
        }
        if (zero) continue;
        ComponentStats st{{len(rng)}, {}};
        for (int j = 0; j < m; ++j) {
            st.l.push_back(len(rng));
            st.N.push_back(cnt(rng));
        }
        try {
            const auto c = design(t, st);
            const auto rt = verify_design(t, st, c);
            worst = std::max({worst, rt.max_rel_error_A, rt.max_rel_error_B});
        } catch (const NonpositiveRadicand&) {
            ++bad_radicand;
        }
        ++done;
    }
    return {worst <= 1e-8 && bad_radicand == 0,
            "max rel error " + sci(worst) + ", nonpositive radicands " + std::to_string(bad_radicand)};
}

Outcome closed_form() {
    const ComponentStats st{{2.0, 1.0}, {2}};
    const auto e = limit_endpoints(st, kDesigned);
    const double err = std::max({std::abs(e.A[0] - 1.0), std::abs(e.B[0]), std::abs(e.B[1] - 1.5)});
    double quad = 0.0;
    for (double b : e.B) quad = std::max(quad, std::abs(b * (3 - 2 * b)));
    return {err <= 1e-12 && quad <= 1e-12, "max abs error " + sci(err)};
}

Outcome fiber_oracle() {
    const double pi2 = kPi * kPi;
    const FiberModel model(twin_chain(), twin_chain_decomposition(), zero_coupling(1), 1.0, 64);
    double worst = 0.0;
    for (const auto& pt : theta_grid({64})) {
        const auto ev = model.eigenvalues(boundary_at(pt), 6, true);
        double best = 1e300;
        for (double x : ev) best = std::min(best, std::abs(x - pi2) / pi2);
        worst = std::max(worst, best);
    }
    PeriodCell edge;
    edge.vertices = {{"b0", VertexKind::boundary}, {"b1", VertexKind::boundary}};
    edge.edges = {{"e", "b0", "b1", kPi}};
    edge.boundary_pairs = {{"b0", "b1", {1}}};
    const auto lap = FiberModel::laplacian(edge, 1.0, 8);
    std::vector<double> err;
    for (int r : {1, 2, 4}) err.push_back(fiber_eigenvalues(lap.assemble(Boundary::dirichlet(), r), 1)[0] - 1.0);
    const double order1 = std::log2(err[0] / err[1]), order2 = std::log2(err[1] / err[2]);
    const bool ok = worst <= 1e-5 && std::abs(order1 - 2) <= 0.5 && std::abs(order2 - 2) <= 0.5;
    return {ok, "worst pi^2 rel error " + sci(worst) + ", orders " + sci(order1) + " " +
                    sci(order2)};
}

Outcome enclosure() {
    const FiberModel model(twin_chain(), twin_chain_decomposition(), design(kTargets, {{2.0, 1.0}, {2}}), 0.05);
    const auto N = model.eigenvalues(Boundary::neumann(), 6);
    const auto D = model.eigenvalues(Boundary::dirichlet(), 6);
    int violations = 0;
    for (const auto& pt : theta_grid({64})) {
        const auto ev = model.eigenvalues(boundary_at(pt), 6);
        for (int k = 0; k < 6; ++k) {
            if (ev[k] < N[k] - 1e-9 * std::max(1.0, std::abs(N[k]))) ++violations;
            if (ev[k] > D[k] + 1e-9 * std::max(1.0, std::abs(D[k]))) ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations"};
}

Outcome structure_and_rate() {
    const auto c = design(kTargets, {{2.0, 1.0}, {2}});
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    const auto r = convergence_study(twin_chain(), twin_chain_decomposition(), c, eps, {64});
    bool ok = r.excluded.empty() && r.epsilons.size() == eps.size();
    for (double e : eps) {
        const auto bs = bands(twin_chain(), twin_chain_decomposition(), c, e, 2, {64});
        ok = ok && bs.gaps.size() == 1;
    }
    for (const auto& row : r.errors_A)
        for (double x : row) ok = ok && x >= -1e-8;
    for (const auto& row : r.errors_B)
        for (double x : row) ok = ok && x >= -1e-8;
    ok = ok && r.monotone;
    std::string slopes;
    for (const auto& f : r.fits) {
        slopes += " " + f.name + "=" + (f.exact ? std::string("exact") : sci(f.slope));
        if (!f.exact) ok = ok && std::isfinite(f.slope) && f.slope >= 0.4;
    }
    return {ok, "slopes" + slopes + (r.monotone ? ", monotone" : ", NOT monotone")};
}

CalibrationProblem twin_problem() {
    const auto c = design(kTargets, {{2.0, 1.0}, {2}});
    return {twin_chain(), twin_chain_decomposition(), c.beta, c.gamma, 0.05, {64}, ScanOptions{}};
}

Outcome calibration() {
    const auto p = twin_problem();
    const auto st = component_stats(p.cell, p.d);
    const std::vector<double> alpha_tilde = design(kTargets, st).alpha;
    const auto box = make_calibration_box(alpha_tilde, p.beta, st);
    const auto r = calibrate(kTargets.A, p, box, 1e-6);
    const double on_grid = std::abs(band_edge_A(1, r.alpha, p) - 1.0);
    const bool ok = on_grid <= 1e-6 && r.max_residual_doubled() <= 1e-5 && r.alpha[0] >= alpha_tilde[0];
    return {ok, "alpha " + sci(r.alpha[0]) + ", residual " + sci(on_grid) + ", doubled grid " +
                    sci(r.max_residual_doubled())};
}

Outcome monotonicity() {
    const auto p = twin_problem();
    const auto st = component_stats(p.cell, p.d);
    const auto box = make_calibration_box(design(kTargets, st).alpha, p.beta, st);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(box.lower(0), box.upper(0));
    double worst = -1e300;
    for (int i = 0; i < 20; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        worst = std::max(worst, band_edge_A(1, {a}, p) - band_edge_A(1, {b}, p));
    }
    return {worst <= 1e-10, "max F(a) - F(a') = " + sci(worst)};
}

Outcome validator() {
    const auto cell = twin_chain();
    const auto d = twin_chain_decomposition();
    bool ok = validate_decomposition(cell, d).ok();
    std::string detail = ok ? "twin-chain accepted" : "twin-chain REJECTED";

    const auto line = line_cell(3);
    const Decomposition ld{1, {{"s0", 0}, {"s1", 1}, {"s2", 0}}, "x1"};
    const bool line_rejected = validate_decomposition(line, ld).has("condition_i");
    ok = ok && line_rejected;

    auto mutant = [&](const std::string& code, PeriodCell c, Decomposition m) {
        const bool hit = validate_decomposition(c, m).has(code);
        detail += std::string(", ") + code + (hit ? " caught" : " MISSED");
        return hit;
    };
    auto d2 = d;
    d2.edge_component["e0"] = 1;
    ok = mutant("condition_ii", cell, d2) && ok;

    auto c3 = cell;
    c3.edges.push_back({"e5", "v", "w", 1.0});
    auto d3 = d;
    d3.m = 2;
    d3.edge_component["e5"] = 2;
    ok = mutant("condition_iii", c3, d3) && ok;

    auto c4 = cell;
    c4.vertices.push_back({"z", VertexKind::interior});
    c4.vertices.push_back({"x", VertexKind::interior});
    c4.edges.pop_back();
    c4.edges.push_back({"e4a", "v", "z", 0.5});
    c4.edges.push_back({"e4b", "z", "w", 0.5});
    c4.edges.push_back({"e5", "z", "x", 1.0});
    const Decomposition d4{2, {{"e0", 0}, {"e1", 0}, {"e2", 0}, {"e3", 0}, {"e4a", 1}, {"e4b", 1}, {"e5", 2}}, "c"};
    ok = mutant("condition_iv", c4, d4) && ok;

    auto d5 = d;
    d5.tilde_v = "v";
    ok = mutant("condition_v", cell, d5) && ok;
    return {ok, detail + (line_rejected ? ", line rejected by (i)" : ", line NOT rejected")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"limit-model oracle equivalence", limit_oracle},
        {"design round trip", design_roundtrip},
        {"closed-form twin-chain values", closed_form},
        {"fiber solver analytic oracle", fiber_oracle},
        {"enclosure", enclosure},
        {"gap structure and convergence rate", structure_and_rate},
        {"calibration", calibration},
        {"band-top monotonicity", monotonicity},
        {"decomposition validator", validator},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s criterion %zu: %s (%s) [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
