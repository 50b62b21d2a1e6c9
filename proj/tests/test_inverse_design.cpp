#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gapforge/inverse_design.hpp"

using namespace gapforge;

namespace {

ComponentStats twin_stats() { return {{2.0, 1.0}, {2}}; }

GapTargets random_targets(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> step(0.05, 2.0), start(-3.0, 3.0);
    for (;;) {
        std::vector<double> seq{start(rng)};
        for (int i = 0; i < 2 * m; ++i) seq.push_back(seq.back() + step(rng));
        GapTargets t;
        t.B.push_back(seq[0]);
        for (int j = 0; j < m; ++j) {
            t.A.push_back(seq[2 * j + 1]);
            t.B.push_back(seq[2 * j + 2]);
        }
        bool ok = true;
        for (double a : t.A) ok = ok && std::abs(a) > 1e-3;
        if (ok) return t;
    }
}

ComponentStats random_stats(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> len(0.2, 3.0);
    std::uniform_int_distribution<int> cnt(1, 4);
    ComponentStats st{{len(rng)}, {}};
    for (int j = 0; j < m; ++j) {
        st.l.push_back(len(rng));
        st.N.push_back(cnt(rng));
    }
    return st;
}

}  // namespace

TEST(Weights, HandComputed) {
    // (0; 1, 2; 3, 4): r_1 = (2−1)/1 · (4−1)/(3−1) = 3/2,  r_2 = (4−3)/3 · (2−3)/(1−3) = 1/6
    const auto r = weights_r({{1.0, 3.0}, {0.0, 2.0, 4.0}});
    EXPECT_NEAR(r[0], 1.5, 1e-15);
    EXPECT_NEAR(r[1], 1.0 / 6.0, 1e-15);
}

TEST(Design, TwinChain) {
    const auto c = design({{1.0}, {0.0, 1.5}}, twin_stats());
    EXPECT_NEAR(c.alpha[0], 0.5, 1e-15);
    EXPECT_NEAR(c.beta[0], 1.0, 1e-15);
    EXPECT_NEAR(c.gamma, 0.0, 1e-15);
}

TEST(Design, RoundTripRandom) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 4;
        const auto t = random_targets(rng, m);
        const auto st = random_stats(rng, m);
        const auto c = design(t, st);
        for (double b : c.beta) EXPECT_GT(b, 0.0);
        const auto rt = verify_design(t, st, c);
        EXPECT_TRUE(rt.ok) << trial << " errA=" << rt.max_rel_error_A << " errB=" << rt.max_rel_error_B;
    }
}

TEST(Design, SignOfAlphaFollowsTarget) {
    const auto c = design({{-1.0, 2.0}, {-2.0, 1.0, 3.0}}, {{1.0, 1.0, 1.0}, {1, 1}});
    EXPECT_LT(c.alpha[0], 0.0);
    EXPECT_GT(c.alpha[1], 0.0);
    EXPECT_TRUE(verify_design({{-1.0, 2.0}, {-2.0, 1.0, 3.0}}, {{1.0, 1.0, 1.0}, {1, 1}}, c).ok);
}

TEST(Design, LargeMUsesStableProducts) {
    std::mt19937_64 rng(5);
    const auto t = random_targets(rng, 10);
    const auto st = random_stats(rng, 10);
    EXPECT_TRUE(verify_design(t, st, design(t, st), 1e-7).ok);
}

TEST(Targets, Rejected) {
    EXPECT_THROW(design({{1.0}, {1.0, 1.5}}, twin_stats()), InvalidTargets);   // B0 = A1
    EXPECT_THROW(design({{1.0}, {0.0}}, twin_stats()), InvalidTargets);        // missing B1
    EXPECT_THROW(design({{0.0}, {-1.0, 1.0}}, twin_stats()), InvalidTargets);  // A1 = 0
    EXPECT_THROW(design({{1.0, 2.0}, {0.0, 1.5, 3.0}}, twin_stats()), InvalidTargets);  // m mismatch
}

TEST(Shift, ZeroTargetMovedAway) {
    const GapTargets t{{0.0}, {-1.0, 0.5}};
    const auto s = shift_for_zero_target(t);
    EXPECT_DOUBLE_EQ(s.shift, 0.25);
    EXPECT_DOUBLE_EQ(s.targets.A[0], 0.25);
    EXPECT_DOUBLE_EQ(s.targets.B[0], -0.75);
    EXPECT_TRUE(verify_design(s.targets, twin_stats(), design(s.targets, twin_stats())).ok);
}

TEST(Shift, NoopWithoutZero) {
    const GapTargets t{{1.0}, {0.0, 1.5}};
    EXPECT_EQ(shift_for_zero_target(t).shift, 0.0);
}
