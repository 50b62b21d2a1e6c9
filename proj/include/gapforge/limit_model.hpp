#pragma once

// Asymptotic (ε → 0) gap endpoints of the coupled periodic graph.
//
// Left endpoints:   A_j = α_j β_j² N_j / l_j.
// Band bottoms:     B_0 < A_1 < B_1 < ... < A_m < B_m are the roots of
//                   g(λ) = λ (l_0 + Σ_j A_j l_j / (β_j² (A_j - λ))) - γ,
// and at the same time the eigenvalues of the (m+1)×(m+1) arrow matrix that
// acts on functions constant on each Y_j (self-adjoint in the l-weighted
// inner product).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapforge/error.hpp"
#include "gapforge/graph.hpp"

namespace gapforge {

struct CouplingSpec {
    std::vector<double> alpha;
    std::vector<double> beta;
    double gamma = 0.0;

    int m() const { return static_cast<int>(alpha.size()); }
};

struct LimitEndpoints {
    std::vector<double> A;  // sorted strictly increasing
    std::vector<double> B;  // B_0 .. B_m
};

struct SortedA {
    std::vector<double> values;         // ascending
    std::vector<int> component;         // values[i] belongs to component component[i] (1-based)
};

struct LimitMatrix {
    Eigen::MatrixXd entries;
    std::vector<double> weights;  // l_0 .. l_m
};

inline constexpr double kTolRoot = 1e-15;
inline constexpr int kBoundExpand = 200;

inline void validate_stats(const ComponentStats& st) {
    if (st.N.empty()) throw InvalidDecomposition("component stats need m >= 1");
    if (st.l.size() != st.N.size() + 1) throw InvalidDecomposition("stats must carry m+1 lengths and m counts");
    for (double l : st.l)
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidDecomposition("component lengths must be positive");
    for (int n : st.N)
        if (n < 1) throw InvalidDecomposition("attachment counts must be at least 1");
}

inline void validate_coupling(const CouplingSpec& c, int m) {
    if (c.alpha.size() != static_cast<std::size_t>(m) || c.beta.size() != static_cast<std::size_t>(m))
        throw InvalidCoupling("expected " + std::to_string(m) + " alpha and beta values", "couplings");
    for (int j = 0; j < m; ++j) {
        if (!std::isfinite(c.alpha[j]) || c.alpha[j] == 0.0)
            throw InvalidCoupling("alpha_" + std::to_string(j + 1) + " must be finite and nonzero", "couplings.alpha");
        if (!std::isfinite(c.beta[j]) || c.beta[j] == 0.0)
            throw InvalidCoupling("beta_" + std::to_string(j + 1) + " must be finite and nonzero", "couplings.beta");
    }
    if (!std::isfinite(c.gamma)) throw InvalidCoupling("gamma must be finite", "couplings.gamma");
}

// A_j per component, in component order (no sorting, no distinctness check).
inline std::vector<double> raw_A(const ComponentStats& st, const CouplingSpec& c) {
    std::vector<double> A(st.m());
    for (int j = 0; j < st.m(); ++j) A[j] = c.alpha[j] * c.beta[j] * c.beta[j] * st.N[j] / st.l[j + 1];
    return A;
}

inline double distinct_tolerance(const std::vector<double>& A) {
    double scale = 1.0;
    for (double a : A) scale = std::max(scale, std::abs(a));
    return 1e-12 * scale;
}

inline SortedA limit_A(const ComponentStats& st, const CouplingSpec& c) {
    validate_stats(st);
    validate_coupling(c, st.m());
    const auto A = raw_A(st, c);
    SortedA out;
    out.component.resize(A.size());
    std::iota(out.component.begin(), out.component.end(), 1);
    std::stable_sort(out.component.begin(), out.component.end(),
                     [&](int a, int b) { return A[a - 1] < A[b - 1]; });
    for (int j : out.component) out.values.push_back(A[j - 1]);
    const double tol = distinct_tolerance(A);
    for (std::size_t i = 1; i < out.values.size(); ++i)
        if (out.values[i] - out.values[i - 1] <= tol)
            throw DegenerateA("A_" + std::to_string(out.component[i - 1]) + " and A_" +
                              std::to_string(out.component[i]) + " coincide");
    return out;
}

// Diagonal of the antiperiodic limit matrix. Same numbers as limit_A, reached
// by reading them off a diagonal matrix instead of the closed formula.
inline std::vector<double> limit_A_antiperiodic(const ComponentStats& st, const CouplingSpec& c) {
    validate_stats(st);
    validate_coupling(c, st.m());
    const int m = st.m();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) H(j, j) = c.alpha[j] * c.beta[j] * c.beta[j] * st.N[j] / st.l[j + 1];
    std::vector<double> d(m);
    for (int j = 0; j < m; ++j) d[j] = H(j, j);
    std::sort(d.begin(), d.end());
    return d;
}

inline LimitMatrix assemble_limit_matrix(const ComponentStats& st, const CouplingSpec& c) {
    validate_stats(st);
    validate_coupling(c, st.m());
    const int m = st.m();
    LimitMatrix M;
    M.weights = st.l;
    M.entries = Eigen::MatrixXd::Zero(m + 1, m + 1);
    double top = c.gamma;
    for (int j = 0; j < m; ++j) top += c.alpha[j] * st.N[j];
    M.entries(0, 0) = top / st.l[0];
    for (int j = 1; j <= m; ++j) {
        const double a = c.alpha[j - 1], b = c.beta[j - 1];
        const double n = st.N[j - 1];
        M.entries(0, j) = -a * b * n / st.l[0];
        M.entries(j, 0) = -a * b * n / st.l[j];
        M.entries(j, j) = a * b * b * n / st.l[j];
    }
    return M;
}

// Largest |l_i M_ik - l_k M_ki| relative to the entry scale.
inline double weighted_asymmetry(const LimitMatrix& M) {
    const auto n = M.entries.rows();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double a = M.weights[i] * M.entries(i, k), b = M.weights[k] * M.entries(k, i);
            const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
            worst = std::max(worst, std::abs(a - b) / scale);
        }
    return worst;
}

inline std::vector<double> limit_B_matrix(const LimitMatrix& M) {
    const auto n = M.entries.rows();
    if (M.entries.cols() != n || static_cast<Eigen::Index>(M.weights.size()) != n)
        throw SymmetryViolation("limit matrix and weights disagree in size");
    if (weighted_asymmetry(M) > 1e-10)
        throw SymmetryViolation("limit matrix is not self-adjoint in the weighted inner product");
    // D M D^{-1} with D = diag(sqrt(l)) is symmetric.
    Eigen::MatrixXd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            S(i, k) = std::sqrt(M.weights[i]) * M.entries(i, k) / std::sqrt(M.weights[k]);
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed on limit matrix");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// g(λ) with the A_j given in any order; β and l follow the component order
// recorded in `sorted.component`.
class SecularFunction {
public:
    SecularFunction(const ComponentStats& st, const CouplingSpec& c, const SortedA& sorted)
        : l0_(st.l[0]), gamma_(c.gamma) {
        for (std::size_t i = 0; i < sorted.values.size(); ++i) {
            const int j = sorted.component[i];
            const double beta = c.beta[j - 1];
            A_.push_back(sorted.values[i]);
            weight_.push_back(sorted.values[i] * st.l[j] / (beta * beta));
        }
    }

    double operator()(double lambda) const {
        double s = l0_;
        for (std::size_t i = 0; i < A_.size(); ++i) s += weight_[i] / (A_[i] - lambda);
        return lambda * s - gamma_;
    }

    const std::vector<double>& poles() const { return A_; }

private:
    double l0_;
    double gamma_;
    std::vector<double> A_;
    std::vector<double> weight_;
};

namespace detail {

// Bisection on a bracket with f(lo) and f(hi) of opposite signs.
template <class F>
double bisect(const F& f, double lo, double hi, double flo, double rel_tol, double abs_floor) {
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (hi - lo <= std::max(rel_tol * std::max(std::abs(lo), std::abs(hi)), abs_floor)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline std::vector<double> limit_B_secular(const ComponentStats& st, const CouplingSpec& c, const SortedA& A) {
    validate_stats(st);
    validate_coupling(c, st.m());
    const auto& poles = A.values;
    const int m = static_cast<int>(poles.size());
    if (m != st.m()) throw InvalidCoupling("sorted A has wrong length");
    for (int i = 1; i < m; ++i)
        if (!(poles[i] > poles[i - 1])) throw DegenerateA("A must be strictly increasing");

    const SecularFunction g(st, c, A);
    double scale = std::abs(c.gamma) / st.l[0];
    for (double a : poles) scale = std::max(scale, std::abs(a));
    const double abs_floor = 1e-3 * kTolRoot * scale;

    // Offset from each pole so g is never evaluated at a singularity.
    const double span = m > 1 ? poles.back() - poles.front() : std::max(1.0, std::abs(poles.front()));
    auto gap_after = [&](int i) { return i + 1 < m ? poles[i + 1] - poles[i] : span; };
    auto gap_before = [&](int i) { return i > 0 ? poles[i] - poles[i - 1] : span; };

    std::vector<double> roots;
    roots.reserve(m + 1);

    // (-inf, A_1): g -> +inf at A_1^-, g ~ λ l_0 -> -inf.
    {
        const double hi = poles.front() - 1e-9 * gap_after(0);
        double offset = 1.0;
        double lo = poles.front() - offset;
        int k = 0;
        while (g(lo) >= 0.0) {
            if (++k > kBoundExpand) throw RootNotBracketed("could not bracket B_0");
            offset *= 2.0;
            lo = poles.front() - offset;
        }
        if (g(hi) <= 0.0) throw RootNotBracketed("g does not change sign below A_1");
        roots.push_back(detail::bisect(g, lo, hi, g(lo), kTolRoot, abs_floor));
    }
    for (int i = 0; i + 1 < m; ++i) {
        const double d = poles[i + 1] - poles[i];
        const double lo = poles[i] + 1e-9 * d, hi = poles[i + 1] - 1e-9 * d;
        const double flo = g(lo), fhi = g(hi);
        if (!(flo < 0.0 && fhi > 0.0))
            throw RootNotBracketed("g does not change sign on (A_" + std::to_string(i + 1) + ", A_" +
                                   std::to_string(i + 2) + ")");
        roots.push_back(detail::bisect(g, lo, hi, flo, kTolRoot, abs_floor));
    }
    {
        const double lo = poles.back() + 1e-9 * gap_before(m - 1);
        double offset = 1.0;
        double hi = poles.back() + offset;
        int k = 0;
        while (g(hi) <= 0.0) {
            if (++k > kBoundExpand) throw RootNotBracketed("could not bracket B_m");
            offset *= 2.0;
            hi = poles.back() + offset;
        }
        if (g(lo) >= 0.0) throw RootNotBracketed("g does not change sign above A_m");
        roots.push_back(detail::bisect(g, lo, hi, g(lo), kTolRoot, abs_floor));
    }
    return roots;
}

inline bool interlaced(const std::vector<double>& A, const std::vector<double>& B) {
    if (B.size() != A.size() + 1) return false;
    for (std::size_t j = 0; j < A.size(); ++j)
        if (!(B[j] < A[j] && A[j] < B[j + 1])) return false;
    return true;
}

inline LimitEndpoints limit_endpoints(const ComponentStats& st, const CouplingSpec& c) {
    const auto A = limit_A(st, c);
    LimitEndpoints out{A.values, limit_B_secular(st, c, A)};
    if (!interlaced(out.A, out.B)) throw NumericalError("limit endpoints failed to interlace");
    return out;
}

}  // namespace gapforge
