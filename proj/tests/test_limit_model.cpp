#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gapforge/catalog.hpp"
#include "gapforge/limit_model.hpp"

using namespace gapforge;
using namespace gapforge::catalog;

namespace {

ComponentStats twin_stats() { return {{2.0, 1.0}, {2}}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Random stats and couplings with well separated A_j.
std::pair<ComponentStats, CouplingSpec> random_case(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> len(0.2, 3.0), coef(0.2, 3.0), sgn(0.0, 1.0), gam(-2.0, 2.0);
    std::uniform_int_distribution<int> cnt(1, 4);
    for (;;) {
        ComponentStats st;
        CouplingSpec c;
        st.l.push_back(len(rng));
        for (int j = 0; j < m; ++j) {
            st.l.push_back(len(rng));
            st.N.push_back(cnt(rng));
            c.alpha.push_back((sgn(rng) < 0.2 ? -1.0 : 1.0) * coef(rng));
            c.beta.push_back((sgn(rng) < 0.5 ? -1.0 : 1.0) * coef(rng));
        }
        c.gamma = gam(rng);
        auto A = raw_A(st, c);
        std::sort(A.begin(), A.end());
        bool ok = true;
        for (int j = 1; j < m; ++j) ok = ok && A[j] - A[j - 1] > 1e-3 * std::max(1.0, std::abs(A[j]));
        if (ok) return {st, c};
    }
}

}  // namespace

TEST(LimitA, TwinChain) {
    const auto A = limit_A(twin_stats(), {{0.5}, {1.0}, 0.0});
    ASSERT_EQ(A.values.size(), 1u);
    EXPECT_NEAR(A.values[0], 1.0, 1e-15);
    EXPECT_EQ(A.component, std::vector<int>{1});
}

TEST(LimitB, TwinChainClosedForm) {
    // g(λ) = λ(2 + 1/(1 − λ)) = λ(3 − 2λ)/(1 − λ)
    const CouplingSpec c{{0.5}, {1.0}, 0.0};
    const auto e = limit_endpoints(twin_stats(), c);
    ASSERT_EQ(e.B.size(), 2u);
    EXPECT_NEAR(e.B[0], 0.0, 1e-12);
    EXPECT_NEAR(e.B[1], 1.5, 1e-12);
    const auto Bm = limit_B_matrix(assemble_limit_matrix(twin_stats(), c));
    EXPECT_NEAR(Bm[0], 0.0, 1e-12);
    EXPECT_NEAR(Bm[1], 1.5, 1e-12);
    for (double b : e.B) EXPECT_NEAR(b * (3 - 2 * b), 0.0, 1e-12);
}

TEST(LimitB, SecularFunctionVanishesAtRoots) {
    const CouplingSpec c{{0.5}, {1.0}, 0.3};
    const auto st = twin_stats();
    const auto A = limit_A(st, c);
    const SecularFunction g(st, c, A);
    for (double b : limit_B_secular(st, c, A)) EXPECT_NEAR(g(b), 0.0, 1e-12);
}

TEST(LimitB, OracleEquivalenceRandom) {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 3;
        const auto [st, c] = random_case(rng, m);
        const auto e = limit_endpoints(st, c);
        const auto Bm = limit_B_matrix(assemble_limit_matrix(st, c));
        ASSERT_EQ(Bm.size(), e.B.size());
        double scale = 1.0;
        for (double b : Bm) scale = std::max(scale, std::abs(b));
        for (std::size_t i = 0; i < Bm.size(); ++i) EXPECT_LE(std::abs(Bm[i] - e.B[i]) / scale, 1e-8) << trial;
        EXPECT_TRUE(interlaced(e.A, e.B)) << trial;
    }
}

TEST(LimitA, AntiperiodicRouteAgrees) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto [st, c] = random_case(rng, 3);
        const auto a = limit_A(st, c).values;
        const auto b = limit_A_antiperiodic(st, c);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(rel(a[i], b[i]), 1e-15);
    }
}

TEST(LimitA, NegativeAlphaGivesNegativeA) {
    const auto A = limit_A({{1.0, 1.0, 1.0}, {1, 1}}, {{-1.0, 2.0}, {1.0, 1.0}, 0.0});
    EXPECT_DOUBLE_EQ(A.values[0], -1.0);
    EXPECT_EQ(A.component, (std::vector<int>{1, 2}));
}

TEST(LimitA, SortsAndTracksComponents) {
    const auto A = limit_A({{1.0, 1.0, 1.0}, {1, 1}}, {{3.0, 2.0}, {1.0, 1.0}, 0.0});
    EXPECT_EQ(A.values, (std::vector<double>{2.0, 3.0}));
    EXPECT_EQ(A.component, (std::vector<int>{2, 1}));
}

TEST(LimitA, DegenerateRejected) {
    EXPECT_THROW(limit_A({{1.0, 1.0, 2.0}, {1, 2}}, {{1.0, 1.0}, {1.0, 1.0}, 0.0}), DegenerateA);
}

TEST(Coupling, ZeroAlphaOrBetaRejected) {
    EXPECT_THROW(limit_A(twin_stats(), {{0.0}, {1.0}, 0.0}), InvalidCoupling);
    EXPECT_THROW(limit_A(twin_stats(), {{1.0}, {0.0}, 0.0}), InvalidCoupling);
    EXPECT_THROW(limit_A(twin_stats(), {{1.0, 2.0}, {1.0}, 0.0}), InvalidCoupling);
}

TEST(Stats, Rejected) {
    EXPECT_THROW(limit_A({{1.0}, {}}, {{}, {}, 0.0}), InvalidDecomposition);
    EXPECT_THROW(limit_A({{0.0, 1.0}, {1}}, {{1.0}, {1.0}, 0.0}), InvalidDecomposition);
}

TEST(Matrix, WeightedSelfAdjoint) {
    std::mt19937_64 rng(11);
    const auto [st, c] = random_case(rng, 3);
    const auto M = assemble_limit_matrix(st, c);
    EXPECT_LE(weighted_asymmetry(M), 1e-14);
    auto broken = M;
    broken.entries(0, 1) *= 1.5;
    EXPECT_THROW(limit_B_matrix(broken), SymmetryViolation);
}

TEST(Interlacing, GammaShiftsB0) {
    // With γ = 0 the constant is always in the kernel: B_0 = 0.
    std::mt19937_64 rng(3);
    auto [st, c] = random_case(rng, 2);
    for (auto& a : c.alpha) a = std::abs(a);
    c.gamma = 0.0;
    EXPECT_NEAR(limit_endpoints(st, c).B[0], 0.0, 1e-12);
    c.gamma = 1.0;
    EXPECT_GT(limit_endpoints(st, c).B[0], 0.0);
    c.gamma = -1.0;
    EXPECT_LT(limit_endpoints(st, c).B[0], 0.0);
}

TEST(Interlacing, Helper) {
    EXPECT_TRUE(interlaced({1.0}, {0.0, 2.0}));
    EXPECT_FALSE(interlaced({1.0}, {1.0, 2.0}));
    EXPECT_FALSE(interlaced({1.0}, {0.0}));
}
