#pragma once

// Couplings (α, β, γ) whose limit endpoints hit prescribed numbers
// B̃_0 < Ã_1 < B̃_1 < ... < Ã_m < B̃_m exactly.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/limit_model.hpp"

namespace gapforge {

struct GapTargets {
    std::vector<double> A;  // Ã_1 .. Ã_m
    std::vector<double> B;  // B̃_0 .. B̃_m

    int m() const { return static_cast<int>(A.size()); }
};

inline void validate_interlacing(const GapTargets& t) {
    if (t.A.empty()) throw InvalidTargets("at least one gap is required", "targets.A");
    if (t.B.size() != t.A.size() + 1) throw InvalidTargets("need m+1 band bottoms for m gaps", "targets.B");
    for (double x : t.A)
        if (!std::isfinite(x)) throw InvalidTargets("targets must be finite", "targets.A");
    for (double x : t.B)
        if (!std::isfinite(x)) throw InvalidTargets("targets must be finite", "targets.B");
    if (!interlaced(t.A, t.B)) throw InvalidTargets("targets must satisfy B0 < A1 < B1 < ... < Am < Bm");
}

inline void validate_targets(const GapTargets& t) {
    validate_interlacing(t);
    for (std::size_t j = 0; j < t.A.size(); ++j)
        if (t.A[j] == 0.0) throw InvalidTargets("A_" + std::to_string(j + 1) + " must be nonzero", "targets.A");
}

// r̃_j = ((B̃_j − Ã_j)/Ã_j) · Π_{i≠j} (B̃_i − Ã_j)/(Ã_i − Ã_j).
// Every factor of the product is positive on interlaced targets, so
// sign(r̃_j) = sign(Ã_j).
inline std::vector<double> weights_r(const GapTargets& t) {
    validate_targets(t);
    const int m = t.m();
    std::vector<double> r(m);
    for (int j = 0; j < m; ++j) {
        const double Aj = t.A[j];
        for (int i = 0; i < m; ++i) {
            if (i == j) continue;
            const double num = t.B[i + 1] - Aj, den = t.A[i] - Aj;
            if (!((num > 0.0) == (den > 0.0)) || num == 0.0 || den == 0.0)
                throw NonpositiveRadicand("sign invariant violated for i=" + std::to_string(i + 1) +
                                          ", j=" + std::to_string(j + 1));
        }
        const double lead = (t.B[j + 1] - Aj) / Aj;
        if (m > 8) {
            // Accumulate in log space; all product factors are positive.
            double log_mag = std::log(std::abs(lead));
            for (int i = 0; i < m; ++i)
                if (i != j) log_mag += std::log((t.B[i + 1] - Aj) / (t.A[i] - Aj));
            r[j] = std::copysign(std::exp(log_mag), lead);
        } else {
            double prod = lead;
            for (int i = 0; i < m; ++i)
                if (i != j) prod *= (t.B[i + 1] - Aj) / (t.A[i] - Aj);
            r[j] = prod;
        }
    }
    return r;
}

inline CouplingSpec design(const GapTargets& t, const ComponentStats& st) {
    validate_targets(t);
    validate_stats(st);
    if (st.m() != t.m())
        throw InvalidTargets("targets describe " + std::to_string(t.m()) + " gaps but the decomposition has m = " +
                             std::to_string(st.m()));
    const auto r = weights_r(t);
    const int m = t.m();
    const double l0 = st.l[0], B0 = t.B[0];
    CouplingSpec c;
    double rsum = 0.0;
    for (int j = 0; j < m; ++j) {
        const double lj = st.l[j + 1];
        const double scaled = r[j] * (t.A[j] - B0);
        const double radicand = t.A[j] * lj / (scaled * l0);
        if (!(radicand > 0.0) || !std::isfinite(radicand))
            throw NonpositiveRadicand("radicand for beta_" + std::to_string(j + 1) + " is not positive");
        c.alpha.push_back(scaled * l0 / st.N[j]);
        c.beta.push_back(std::sqrt(radicand));
        rsum += r[j];
    }
    c.gamma = B0 * (1.0 + rsum) * l0;
    return c;
}

struct RoundTrip {
    LimitEndpoints forward;
    double max_rel_error_A = 0.0;
    double max_rel_error_B = 0.0;
    bool ok = false;
};

// Forward map of the designed couplings compared against the targets.
inline RoundTrip verify_design(const GapTargets& t, const ComponentStats& st, const CouplingSpec& c,
                               double rel_tol = 1e-8) {
    RoundTrip rt;
    const auto A = limit_A(st, c);
    rt.forward.A = A.values;
    rt.forward.B = limit_B_matrix(assemble_limit_matrix(st, c));
    double scale = 1.0;
    for (double x : t.B) scale = std::max(scale, std::abs(x));
    for (std::size_t j = 0; j < t.A.size(); ++j)
        rt.max_rel_error_A = std::max(rt.max_rel_error_A, std::abs(rt.forward.A[j] - t.A[j]) / scale);
    for (std::size_t j = 0; j < t.B.size(); ++j)
        rt.max_rel_error_B = std::max(rt.max_rel_error_B, std::abs(rt.forward.B[j] - t.B[j]) / scale);
    rt.ok = rt.max_rel_error_A <= rel_tol && rt.max_rel_error_B <= rel_tol;
    return rt;
}

struct ShiftedTargets {
    double shift = 0.0;
    GapTargets targets;
};

// Targets with some Ã_j = 0 cannot be realised directly; shifting the whole
// spectrum by a constant potential γ̂ fixes that. γ̂ is half the smallest
// spacing next to an offending Ã_j, which keeps every shifted Ã_j nonzero.
inline ShiftedTargets shift_for_zero_target(const GapTargets& t) {
    validate_interlacing(t);
    ShiftedTargets out{0.0, t};
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.A.size(); ++j) {
        if (t.A[j] != 0.0) continue;
        spacing = std::min({spacing, t.A[j] - t.B[j], t.B[j + 1] - t.A[j]});
    }
    if (!std::isfinite(spacing)) return out;
    out.shift = 0.5 * spacing;
    for (auto& a : out.targets.A) a += out.shift;
    for (auto& b : out.targets.B) b += out.shift;
    for (double a : out.targets.A)
        if (a == 0.0) throw InvalidTargets("shifted targets still contain a zero left endpoint");
    return out;
}

}  // namespace gapforge
