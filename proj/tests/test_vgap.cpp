#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"

using namespace nugap;
using nugap::testing::Layout;

namespace {
const double kPi4 = std::numbers::pi / 4;
RationalFunction tf(Polynomial n, Polynomial d) { return RationalFunction(std::move(n), std::move(d)); }
}  // namespace

TEST(Comparable, Examples) {
    EXPECT_TRUE(comparable(tf({1}, {1, 1}), tf({2}, {3, 1})));
    EXPECT_FALSE(comparable(tf({1}, {1, 1}), tf({1}, {-1, 1})));
    EXPECT_TRUE(comparable(tf({-1, 1}, {2, 1}), tf({-3, 1}, {5, 1})));
}

TEST(Comparable, AxisRootsAreIndeterminate) {
    Comparability c = comparability(tf({1}, {0, 1}), tf({2}, {0, 1}));
    EXPECT_TRUE(c.comparable);
    EXPECT_TRUE(c.indeterminate);
}

TEST(VGap, Examples) {
    RationalFunction g = tf({1, 2}, {3, 1, 1});
    EXPECT_LT(v_gap(g, g).value, 1e-12);
    EXPECT_NEAR(v_gap(RationalFunction(0.0), RationalFunction(1.0)).value, kPi4, 1e-9);
    GapResult r = v_gap(tf({1}, {1, 1}), tf({1}, {-1, 1}));
    EXPECT_FALSE(r.comparable);
    EXPECT_EQ(r.value, std::numbers::pi / 2);
}

TEST(Ball, Examples) {
    RationalFunction g = tf({1}, {1, 1});
    EXPECT_TRUE(ball_contains(g, 0.1, g));
    EXPECT_FALSE(ball_contains(RationalFunction(0.0), 0.5, RationalFunction(1.0)));
    EXPECT_TRUE(ball_contains(RationalFunction(0.0), 0.79, RationalFunction(1.0)));
    EXPECT_THROW(ball_contains(g, -0.1, g), DomainError);
}

TEST(Margin, Examples) {
    MarginResult a = stability_margin(tf({1}, {0, 1}), RationalFunction(1.0));
    EXPECT_TRUE(a.closed_loop_stable);
    EXPECT_NEAR(a.value, kPi4, 1e-6);
    MarginResult b = stability_margin(tf({1}, {-1, 1}), RationalFunction(0.0));
    EXPECT_FALSE(b.closed_loop_stable);
    EXPECT_EQ(b.value, 0.0);
    EXPECT_NEAR(stability_margin(RationalFunction(0.0), RationalFunction(1.0)).value, kPi4, 1e-9);
}

TEST(Margin, ZeroControllerIsChordalToInfinity) {
    // C = 0: distance from P to the point at infinity is 1/sqrt(1+|P|^2), smallest at the DC gain 1
    MarginResult m = stability_margin(tf({1}, {1, 1}), RationalFunction(0.0));
    EXPECT_TRUE(m.closed_loop_stable);
    EXPECT_NEAR(m.value, std::asin(1 / std::sqrt(2.0)), 1e-9);
}

TEST(Margin, HiddenUnstableCancellation) {
    // P = 1/(s-1), C = (s-1)/(s+2): P C is stable-looking but the loop hides the RHP pole
    MarginResult m = stability_margin(tf({1}, {-1, 1}), tf({-1, 1}, {2, 1}));
    EXPECT_FALSE(m.closed_loop_stable);
    EXPECT_EQ(m.value, 0.0);
}

TEST(Margin, DegenerateLoop) {
    // nP nC + dP dC = 0 identically: P = 1, C = -1
    EXPECT_THROW(stability_margin(RationalFunction(1.0), RationalFunction(-1.0)), DegenerateLoop);
}

TEST(MarginCertificate, Examples) {
    RationalFunction p = tf({1}, {0, 1}), c(1.0);
    Theorem1Result a = theorem1_certify(p, c, 0.3, 0.3);
    EXPECT_TRUE(a.certified_stable);
    EXPECT_NEAR(a.slack, kPi4 - 0.6, 1e-6);
    EXPECT_FALSE(theorem1_certify(p, c, 0.5, 0.5).certified_stable);
    EXPECT_FALSE(theorem1_certify(tf({1}, {-1, 1}), RationalFunction(0.0), 0, 0).certified_stable);
}

TEST(VGap, MetricAxiomsOnRandomTriples) {
    std::mt19937 rng(31);
    int violations = 0;
    for (int k = 0; k < 150; ++k) {
        Layout base = nugap::testing::random_stable(rng, 3);
        RationalFunction a = base.rf(), b = nugap::testing::nudge(rng, base).rf(), c = nugap::testing::nudge(rng, base).rf();
        GapResult ab = v_gap(a, b), ba = v_gap(b, a), bc = v_gap(b, c), ac = v_gap(a, c);
        EXPECT_LT(std::abs(ab.value - ba.value), 1e-10);
        EXPECT_LT(v_gap(a, a).value, 1e-10);
        for (double v : {ab.value, bc.value, ac.value}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, std::numbers::pi / 2);
        }
        if (ac.value > ab.value + bc.value + 1e-6) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(MarginCertificate, SufficiencyAgainstCharacteristicPolynomial) {
    std::mt19937 rng(32);
    std::uniform_real_distribution<double> kc(0.2, 2.0);
    int certified = 0;
    for (int k = 0; k < 500; ++k) {
        Layout pl = nugap::testing::random_stable(rng, 3);
        RationalFunction p = pl.rf(), c(kc(rng));
        RationalFunction pt = nugap::testing::nudge(rng, pl, 0.5).rf();
        GapResult g = v_gap(p, pt);
        if (!g.comparable) continue;
        Theorem1Result t = theorem1_certify(p, c, g.value, 0.0);
        if (!t.certified_stable) continue;
        ++certified;
        StabilityInfo st = loop_stability(pt, c);
        EXPECT_TRUE(st.stable) << "certified perturbation destabilized the loop";
    }
    EXPECT_GT(certified, 50);
}

TEST(MarginCertificate, BoundIsOftenTight) {
    // gain and time-scale families: find a destabilizing perturbation within margin + 0.05
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> kc(0.3, 3.0), sign(-1, 1);
    int loops = 0, tight = 0;
    for (int k = 0; k < 60; ++k) {
        Layout pl = nugap::testing::random_stable(rng, 3);
        RationalFunction p = pl.rf();
        RationalFunction c(kc(rng) * (sign(rng) < 0 ? -1.0 : 1.0));
        MarginResult m = stability_margin(p, c);
        if (!m.closed_loop_stable) continue;
        ++loops;
        bool found = false;
        for (int j = 1; j <= 200 && !found; ++j) {
            for (int fam = 0; fam < 4 && !found; ++fam) {
                double f = std::pow(1.03, fam % 2 ? -j : j);
                Layout t = pl;
                if (fam < 2) t.gain *= f;
                else
                    for (cplx& r : t.poles) r *= f;
                RationalFunction pt = t.rf();
                GapResult g = v_gap(p, pt);
                if (!g.comparable || g.value > m.value + 0.05) continue;
                if (!loop_stability(pt, c).stable) found = true;
            }
        }
        if (found) ++tight;
    }
    ASSERT_GT(loops, 10);
    EXPECT_GE(tight, 0.3 * loops) << tight << " of " << loops;
}
