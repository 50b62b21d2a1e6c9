#pragma once

// Fixed-ε correction of α so that the computed band tops A_{k,ε} hit the
// targets exactly. F_k(α) = max over the θ-grid of λ_k is increasing in every
// α_j, so mixed box corners bracket each target and coordinate bisection in
// Gauss–Seidel order converges to a solution inside the box.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gapforge/band_scan.hpp"
#include "gapforge/error.hpp"
#include "gapforge/fiber.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/limit_model.hpp"
#include "gapforge/parallel.hpp"

namespace gapforge {

struct CalibrationProblem {
    PeriodCell cell;
    Decomposition d;
    std::vector<double> beta;
    double gamma = 0.0;
    double epsilon = 0.0;
    std::vector<int> grid_counts;
    ScanOptions options;
};

// F_1..F_m at α in one pass over the grid.
inline std::vector<double> band_edges(const CalibrationProblem& p, const std::vector<double>& alpha) {
    const int m = p.d.m;
    const FiberModel model(p.cell, p.d, CouplingSpec{alpha, p.beta, p.gamma}, p.epsilon, p.options.mesh);
    const auto grid = theta_grid(p.grid_counts);
    const auto per_theta = parallel_map(grid.size(), p.options.threads, [&](std::size_t i) {
        return model.eigenvalues(boundary_at(grid[i]), m, p.options.richardson());
    });
    std::vector<double> F(m, -std::numeric_limits<double>::infinity());
    for (const auto& ev : per_theta)
        for (int k = 0; k < m; ++k) F[k] = std::max(F[k], ev[k]);
    return F;
}

inline double band_edge_A(int k, const std::vector<double>& alpha, const CalibrationProblem& p) {
    if (k < 1 || k > p.d.m) throw InvalidFiberSpec("band index must lie in [1, m]", "k");
    return band_edges(p, alpha)[k - 1];
}

struct CalibrationBox {
    std::vector<double> center;
    double half_width = 0.0;

    double lower(std::size_t k) const { return center[k] - half_width; }
    double upper(std::size_t k) const { return center[k] + half_width; }
};

// Every α in the box keeps α_j ≠ 0 and the limit A_j stay distinct with the
// same order as at the centre. A_j depends on α_j alone and monotonically, so
// comparing the corner images is enough.
inline bool box_admissible(const CalibrationBox& box, const std::vector<double>& beta, const ComponentStats& st) {
    const std::size_t m = box.center.size();
    if (!(box.half_width > 0.0)) return false;
    std::vector<std::pair<double, double>> range(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (!(box.half_width < std::abs(box.center[j]))) return false;
        const double s = beta[j] * beta[j] * st.N[j] / st.l[j + 1];
        range[j] = {box.lower(j) * s, box.upper(j) * s};
    }
    std::vector<std::size_t> order(m);
    for (std::size_t j = 0; j < m; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return box.center[a] * beta[a] * beta[a] * st.N[a] / st.l[a + 1] <
                                                                        box.center[b] * beta[b] * beta[b] * st.N[b] / st.l[b + 1]; });
    for (std::size_t i = 1; i < m; ++i)
        if (!(range[order[i - 1]].second < range[order[i]].first)) return false;
    return true;
}

// δ defaults to a quarter of the smallest |α̃_j| and is halved until admissible.
inline CalibrationBox make_calibration_box(const std::vector<double>& alpha_tilde, const std::vector<double>& beta,
                                           const ComponentStats& st, double delta = 0.0) {
    if (alpha_tilde.empty()) throw InvalidCoupling("calibration needs at least one alpha", "couplings.alpha");
    CalibrationBox box{alpha_tilde, delta};
    if (!(delta > 0.0)) {
        double smallest = std::numeric_limits<double>::infinity();
        for (double a : alpha_tilde) smallest = std::min(smallest, std::abs(a));
        box.half_width = 0.25 * smallest;
    }
    for (int i = 0; i < 60 && !box_admissible(box, beta, st); ++i) box.half_width *= 0.5;
    if (!box_admissible(box, beta, st)) throw InvalidCoupling("no admissible calibration box around alpha", "couplings.alpha");
    return box;
}

struct CalibrationResult {
    std::vector<double> alpha;
    std::vector<double> F;
    std::vector<double> residuals;          // F_k(α) − Ã_k on the calibration grid
    std::vector<double> residuals_doubled;  // same α, grid counts doubled
    std::vector<double> F_minus, F_plus;    // mixed-corner values that bracket the targets
    CalibrationBox box;
    int sweeps = 0;
    int evaluations = 0;
    bool converged = false;

    double max_residual() const {
        double r = 0.0;
        for (double x : residuals) r = std::max(r, std::abs(x));
        return r;
    }
    double max_residual_doubled() const {
        double r = 0.0;
        for (double x : residuals_doubled) r = std::max(r, std::abs(x));
        return r;
    }
};

namespace detail {

// Component controlling band k: the one whose limit A is the k-th smallest.
inline std::vector<int> band_to_component(const CalibrationProblem& p, const std::vector<double>& alpha) {
    const auto st = component_stats(p.cell, p.d);
    const auto A = limit_A(st, CouplingSpec{alpha, p.beta, p.gamma});
    std::vector<int> out;
    for (int c : A.component) out.push_back(c - 1);
    return out;
}

}  // namespace detail

inline CalibrationResult calibrate(const std::vector<double>& targets, const CalibrationProblem& p,
                                   CalibrationBox box, double tol, int max_sweeps = 50, bool check_doubled = true) {
    const int m = p.d.m;
    if (static_cast<int>(targets.size()) != m) throw InvalidTargets("need one target per gap", "targets.A");
    for (int k = 1; k < m; ++k)
        if (!(targets[k - 1] < targets[k])) throw InvalidTargets("targets must be increasing", "targets.A");
    if (!(tol > 0.0)) throw InvalidFiberSpec("tolerance must be positive", "tol");
    if (static_cast<int>(box.center.size()) != m || static_cast<int>(p.beta.size()) != m)
        throw InvalidCoupling("box and beta must have m entries", "couplings");
    const auto st = component_stats(p.cell, p.d);
    if (!box_admissible(box, p.beta, st)) throw InvalidCoupling("calibration box is not admissible", "couplings.alpha");

    CalibrationResult res;
    auto F = [&](const std::vector<double>& a) {
        ++res.evaluations;
        return band_edges(p, a);
    };
    const auto comp = detail::band_to_component(p, box.center);

    // Bracketing at the mixed corners, widening the box if the targets are outside.
    auto bracket = [&] {
        res.F_minus.assign(m, 0.0);
        res.F_plus.assign(m, 0.0);
        for (int k = 0; k < m; ++k) {
            std::vector<double> lo(m), hi(m);
            for (int j = 0; j < m; ++j) {
                lo[j] = j == comp[k] ? box.lower(j) : box.upper(j);
                hi[j] = j == comp[k] ? box.upper(j) : box.lower(j);
            }
            res.F_minus[k] = F(lo)[k];
            res.F_plus[k] = F(hi)[k];
            if (!(res.F_minus[k] < targets[k] && targets[k] < res.F_plus[k])) return false;
        }
        return true;
    };
    bool ok = bracket();
    for (int grow = 0; !ok && grow < 3; ++grow) {
        CalibrationBox wider = box;
        wider.half_width *= 2.0;
        if (!box_admissible(wider, p.beta, st)) break;
        box = wider;
        ok = bracket();
    }
    res.box = box;
    if (!ok) {
        std::string detail;
        for (int k = 0; k < m; ++k)
            detail += " k=" + std::to_string(k + 1) + ": [" + std::to_string(res.F_minus[k]) + ", " +
                      std::to_string(res.F_plus[k]) + "] vs " + std::to_string(targets[k]) + ";";
        throw BracketingFailed("mixed corners do not bracket the targets (epsilon too large or box too small):" + detail);
    }

    res.alpha = box.center;
    auto residual_ok = [&](const std::vector<double>& f) {
        for (int k = 0; k < m; ++k)
            if (std::abs(f[k] - targets[k]) > tol) return false;
        return true;
    };
    std::vector<double> f = F(res.alpha);
    for (res.sweeps = 0; res.sweeps < max_sweeps && !residual_ok(f);) {
        ++res.sweeps;
        for (int k = 0; k < m; ++k) {
            const int j = comp[k];
            double lo = box.lower(j), hi = box.upper(j);
            double best = res.alpha[j], best_err = std::abs(f[k] - targets[k]);
            for (int it = 0; it < 200 && best_err > 0.1 * tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi)) break;
                res.alpha[j] = mid;
                const double fk = F(res.alpha)[k];
                if (std::abs(fk - targets[k]) < best_err) {
                    best = mid;
                    best_err = std::abs(fk - targets[k]);
                }
                (fk < targets[k] ? lo : hi) = mid;
            }
            res.alpha[j] = best;
        }
        f = F(res.alpha);
    }
    res.F = f;
    for (int k = 0; k < m; ++k) res.residuals.push_back(f[k] - targets[k]);
    res.converged = residual_ok(f);
    if (!res.converged)
        throw NotConverged("calibration stopped after " + std::to_string(res.sweeps) +
                           " sweeps with max residual " + std::to_string(res.max_residual()));
    if (check_doubled) {
        CalibrationProblem fine = p;
        for (auto& g : fine.grid_counts) g *= 2;
        const auto f2 = band_edges(fine, res.alpha);
        for (int k = 0; k < m; ++k) res.residuals_doubled.push_back(f2[k] - targets[k]);
    }
    return res;
}

}  // namespace gapforge
