#pragma once

// Band structure of the periodic operator from fiber eigenvalues on a θ-grid,
// gap detection inside the window (−∞, Λ₀/ε], and ε-convergence studies of
// the gap endpoints against their limit values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gapforge/error.hpp"
#include "gapforge/fiber.hpp"
#include "gapforge/graph.hpp"
#include "gapforge/limit_model.hpp"
#include "gapforge/parallel.hpp"

namespace gapforge {

struct ScanOptions {
    int mesh = kDefaultMesh;
    double tolerance = kRichardsonThreshold;  // below 1e-6 switches on Richardson extrapolation
    int threads = 0;                          // 0: GAPFORGE_THREADS or hardware

    bool richardson() const { return tolerance < kRichardsonThreshold; }
};

inline std::vector<int> default_grid_counts(int n) { return std::vector<int>(n, n == 1 ? 64 : 24); }

// Uniform phases −π + 2πi/G per direction, plus 0 when G is odd, so that the
// periodic point θ_p = (1,…,1) and the antiperiodic point θ_a = (−1,…,−1) are
// always on the grid. Phases are listed with the last direction varying fastest.
inline std::vector<std::vector<double>> theta_grid(const std::vector<int>& counts) {
    std::vector<std::vector<double>> axes;
    for (int g : counts) {
        if (g < 1) throw InvalidFiberSpec("grid counts must be positive", "grid");
        std::set<double> phases;
        for (int i = 0; i < g; ++i) phases.insert(i == 0 ? -kPi : -kPi + 2.0 * kPi * i / g);
        phases.insert(0.0);
        axes.emplace_back(phases.begin(), phases.end());
    }
    std::vector<std::vector<double>> grid{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : grid)
            for (double p : axis) {
                auto pt = prefix;
                pt.push_back(p);
                next.push_back(std::move(pt));
            }
        grid = std::move(next);
    }
    return grid;
}

// θ = exp(iφ), exact at the points ±1 so θ_p and θ_a are represented exactly.
inline Boundary boundary_at(const std::vector<double>& phases) {
    std::vector<cplx> t;
    for (double p : phases) {
        if (p == 0.0)
            t.emplace_back(1.0, 0.0);
        else if (p == -kPi || p == kPi)
            t.emplace_back(-1.0, 0.0);
        else
            t.push_back(std::polar(1.0, p));
    }
    return Boundary::quasiperiodic(std::move(t));
}

struct Lambda0Result {
    double value = 0.0;
    double y0_antiperiodic = 0.0;        // λ_1 of the Y_0 Laplacian with antiperiodic pairing
    std::vector<double> neumann_second;  // λ_2 of the Neumann Laplacian on Y_j, j = 1..m
};

namespace detail {

inline PeriodCell sub_cell(const PeriodCell& cell, const Decomposition& d, int j) {
    PeriodCell sub;
    sub.n = cell.n;
    std::set<std::string> used;
    for (const auto& e : cell.edges)
        if (d.edge_component.at(e.id) == j) {
            sub.edges.push_back(e);
            used.insert(e.from);
            used.insert(e.to);
        }
    for (const auto& v : cell.vertices)
        if (used.count(v.id)) sub.vertices.push_back(v);
    if (j == 0) sub.boundary_pairs = cell.boundary_pairs;
    return sub;
}

}  // namespace detail

// Λ₀ = ½ min{ λ_1(Y_0, antiperiodic), λ_2(Y_1, Neumann), …, λ_2(Y_m, Neumann) }
// for the decoupled Laplacians at ε = 1. Independent of ε and of the couplings.
inline Lambda0Result lambda0(const PeriodCell& cell, const Decomposition& d, const ScanOptions& opt = {}) {
    require_valid(cell, d);
    Lambda0Result r;
    const auto y0 = detail::sub_cell(cell, d, 0);
    r.y0_antiperiodic = FiberModel::laplacian(y0, 1.0, opt.mesh).eigenvalues(Boundary::antiperiodic(cell.n), 1, true)[0];
    double smallest = r.y0_antiperiodic;
    for (int j = 1; j <= d.m; ++j) {
        const auto yj = detail::sub_cell(cell, d, j);
        const double v = FiberModel::laplacian(yj, 1.0, opt.mesh).eigenvalues(Boundary::periodic(cell.n), 2, true)[1];
        r.neumann_second.push_back(v);
        smallest = std::min(smallest, v);
    }
    r.value = 0.5 * smallest;
    if (!(r.value > 0.0)) throw NumericalError("Lambda0 is not positive; check the decomposition");
    return r;
}

struct BandInterval {
    double min = 0.0;
    double max = 0.0;
};

struct GapInterval {
    double lower = 0.0;
    double upper = 0.0;
    int band_below = 0;  // 1-based
    int band_above = 0;
};

struct BandStructure {
    double epsilon = 0.0;
    int k_max = 0;  // bands requested; `bands` may hold more to cover the window
    int mesh = 0;
    bool richardson = false;
    std::vector<int> grid_counts;
    std::vector<std::vector<double>> theta_phases;
    std::vector<std::vector<double>> eigenvalues;  // [theta][k]
    std::vector<BandInterval> bands;
    std::vector<double> grid_jump;  // largest change of λ_k between neighbouring grid points
    std::vector<GapInterval> gaps;
    double lambda0 = 0.0;
    double window_top = 0.0;
    bool window_covered = false;
    double tol_gap = 0.0;
};

namespace detail {

inline std::vector<GapInterval> find_gaps(const std::vector<BandInterval>& bands, double window_top, double tol) {
    std::vector<GapInterval> gaps;
    if (bands.empty()) return gaps;
    double top = bands[0].max;
    for (std::size_t k = 1; k < bands.size(); ++k) {
        if (top >= window_top) break;
        if (bands[k].min > top + tol)
            gaps.push_back({top, bands[k].min, static_cast<int>(k), static_cast<int>(k + 1)});
        top = std::max(top, bands[k].max);
    }
    return gaps;
}

inline std::vector<double> grid_jumps(const std::vector<std::vector<double>>& values, const std::vector<int>& counts,
                                      std::size_t K) {
    std::vector<double> jump(K, 0.0);
    // Neighbours along each direction in the row-major tensor grid.
    std::vector<std::size_t> dims, stride(counts.size(), 1);
    for (std::size_t k = 0; k < counts.size(); ++k) dims.push_back(theta_grid({counts[k]}).size());
    for (std::size_t k = counts.size(); k-- > 1;) stride[k - 1] = stride[k] * dims[k];
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t dir = 0; dir < dims.size(); ++dir) {
            const std::size_t coord = (i / stride[dir]) % dims[dir];
            const std::size_t nb = coord + 1 < dims[dir] ? i + stride[dir] : i - coord * stride[dir];
            for (std::size_t k = 0; k < K; ++k)
                jump[k] = std::max(jump[k], std::abs(values[i][k] - values[nb][k]));
        }
    return jump;
}

}  // namespace detail

inline BandStructure bands(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c, double epsilon,
                           int k_max, const std::vector<int>& grid_counts, const ScanOptions& opt = {},
                           std::optional<double> lambda0_value = std::nullopt) {
    if (static_cast<int>(grid_counts.size()) != cell.n)
        throw InvalidFiberSpec("grid needs one count per lattice direction", "grid");
    for (int g : grid_counts)
        if (g < 8) throw InvalidFiberSpec("grid counts must be at least 8", "grid");
    if (k_max < 1) throw InvalidFiberSpec("k_max must be positive", "kmax");

    const FiberModel model(cell, d, c, epsilon, opt.mesh);
    BandStructure bs;
    bs.epsilon = epsilon;
    bs.k_max = k_max;
    bs.mesh = opt.mesh;
    bs.richardson = opt.richardson();
    bs.grid_counts = grid_counts;
    bs.lambda0 = lambda0_value ? *lambda0_value : lambda0(cell, d, opt).value;
    bs.window_top = bs.lambda0 / epsilon;
    bs.tol_gap = 1e-9 * std::max(1.0, std::abs(bs.window_top));
    bs.theta_phases = theta_grid(grid_counts);

    const auto full_dim = static_cast<int>(model.assemble(boundary_at(bs.theta_phases[0])).stiffness.rows());
    auto all = parallel_map(bs.theta_phases.size(), opt.threads, [&](std::size_t i) {
        return model.eigenvalues(boundary_at(bs.theta_phases[i]), full_dim, bs.richardson);
    });

    // Keep enough bands that band K starts above the window top everywhere.
    int below = 0;
    for (const auto& ev : all)
        below = std::max(below, static_cast<int>(std::upper_bound(ev.begin(), ev.end(), bs.window_top) - ev.begin()));
    const int K = std::min(full_dim, std::max(k_max, below + 1));
    bs.window_covered = below < full_dim;
    for (auto& ev : all) ev.resize(K);
    bs.eigenvalues = std::move(all);

    bs.bands.assign(K, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& ev : bs.eigenvalues)
        for (int k = 0; k < K; ++k) {
            bs.bands[k].min = std::min(bs.bands[k].min, ev[k]);
            bs.bands[k].max = std::max(bs.bands[k].max, ev[k]);
        }
    bs.grid_jump = detail::grid_jumps(bs.eigenvalues, grid_counts, K);
    bs.gaps = detail::find_gaps(bs.bands, bs.window_top, bs.tol_gap);
    return bs;
}

struct GapEndpoints {
    double B0 = 0.0;
    std::vector<double> A;  // A_{j,ε}: top of band j
    std::vector<double> B;  // B_{j,ε}: bottom of band j+1, j = 1..m
};

inline GapEndpoints gap_endpoints(const BandStructure& bs, int m) {
    if (bs.bands.empty()) throw GapCountMismatch("band structure is empty");
    GapEndpoints g;
    g.B0 = bs.bands[0].min;
    if (static_cast<int>(bs.gaps.size()) < m)
        throw GapCountMismatch("found " + std::to_string(bs.gaps.size()) + " gaps below Lambda0/eps = " +
                               std::to_string(bs.window_top) + ", expected " + std::to_string(m) +
                               " (epsilon too large or grid too coarse)");
    for (int j = 1; j <= m; ++j) {
        if (bs.gaps[j - 1].band_below != j)
            throw GapCountMismatch("gap " + std::to_string(j) + " does not open between bands " + std::to_string(j) +
                                   " and " + std::to_string(j + 1));
        g.A.push_back(bs.bands[j - 1].max);
        g.B.push_back(bs.bands[j].min);
    }
    return g;
}

struct EndpointFit {
    std::string name;  // "A1", "B0", ...
    double slope = std::numeric_limits<double>::quiet_NaN();
    double C = 0.0;
    bool exact = false;  // every recorded error is below the one-sided tolerance
};

struct ConvergenceReport {
    LimitEndpoints limit;
    std::vector<double> epsilons;   // included in the fit
    std::vector<double> excluded;   // GapCountMismatch at these ε
    std::vector<GapEndpoints> endpoints;
    std::vector<std::vector<double>> errors_A;  // [ε][j]  A_j − A_{j,ε}
    std::vector<std::vector<double>> errors_B;  // [ε][j]  B_j − B_{j,ε}, j = 0..m
    std::vector<EndpointFit> fits;              // A_1..A_m then B_0..B_m
    double lambda0 = 0.0;
    double tol_one_sided = 0.0;
    bool one_sided = true;
    bool monotone = true;
};

namespace detail {

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

inline ConvergenceReport convergence_study(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c,
                                           const std::vector<double>& epsilons, const std::vector<int>& grid_counts,
                                           const ScanOptions& opt = {}) {
    if (epsilons.size() < 3) throw InvalidFiberSpec("convergence study needs at least 3 epsilons", "epsilon-list");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw InvalidFiberSpec("epsilons must be positive", "epsilon-list");
        if (i && !(epsilons[i] < epsilons[i - 1]))
            throw InvalidFiberSpec("epsilon list must be strictly decreasing", "epsilon-list");
    }
    const auto stats = component_stats(cell, d);
    ConvergenceReport rep;
    rep.limit = limit_endpoints(stats, c);
    const int m = d.m;
    rep.lambda0 = lambda0(cell, d, opt).value;
    rep.tol_one_sided = 1e-8 * std::max(1.0, std::abs(rep.limit.A.back()));

    for (double eps : epsilons) {
        const auto bs = bands(cell, d, c, eps, m + 1, grid_counts, opt, rep.lambda0);
        GapEndpoints g;
        try {
            g = gap_endpoints(bs, m);
        } catch (const GapCountMismatch&) {
            rep.excluded.push_back(eps);
            continue;
        }
        rep.epsilons.push_back(eps);
        std::vector<double> eA, eB;
        for (int j = 0; j < m; ++j) eA.push_back(rep.limit.A[j] - g.A[j]);
        eB.push_back(rep.limit.B[0] - g.B0);
        for (int j = 0; j < m; ++j) eB.push_back(rep.limit.B[j + 1] - g.B[j]);
        rep.endpoints.push_back(g);
        rep.errors_A.push_back(eA);
        rep.errors_B.push_back(eB);
    }

    auto fit = [&](const std::string& name, auto&& error_at) {
        EndpointFit f;
        f.name = name;
        std::vector<double> xs, ys;
        bool all_small = true;
        for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
            const double e = error_at(i);
            if (e < -rep.tol_one_sided) rep.one_sided = false;
            if (i && e > error_at(i - 1) + rep.tol_one_sided) rep.monotone = false;
            f.C = std::max(f.C, std::max(e, 0.0) / std::sqrt(rep.epsilons[i]));
            if (e > rep.tol_one_sided) {
                all_small = false;
                xs.push_back(rep.epsilons[i]);
                ys.push_back(e);
            }
        }
        f.exact = all_small;
        if (xs.size() >= 2 && xs.size() == rep.epsilons.size()) f.slope = detail::loglog_slope(xs, ys);
        rep.fits.push_back(f);
    };
    for (int j = 0; j < m; ++j) fit("A" + std::to_string(j + 1), [&](std::size_t i) { return rep.errors_A[i][j]; });
    for (int j = 0; j <= m; ++j) fit("B" + std::to_string(j), [&](std::size_t i) { return rep.errors_B[i][j]; });
    return rep;
}

// Largest ε (bisected geometrically between a known-good and a known-bad value)
// at which exactly m gaps are found below the window.
inline double epsilon_threshold(const PeriodCell& cell, const Decomposition& d, const CouplingSpec& c, double eps_good,
                                double eps_bad, const std::vector<int>& grid_counts, const ScanOptions& opt = {},
                                int iterations = 12) {
    const double l0 = lambda0(cell, d, opt).value;
    auto has_m_gaps = [&](double eps) {
        const auto bs = bands(cell, d, c, eps, d.m + 1, grid_counts, opt, l0);
        return static_cast<int>(bs.gaps.size()) == d.m;
    };
    if (!has_m_gaps(eps_good)) throw GapCountMismatch("lower epsilon does not show m gaps");
    if (has_m_gaps(eps_bad)) return eps_bad;
    for (int i = 0; i < iterations; ++i) {
        const double mid = std::sqrt(eps_good * eps_bad);
        (has_m_gaps(mid) ? eps_good : eps_bad) = mid;
    }
    return eps_good;
}

}  // namespace gapforge
