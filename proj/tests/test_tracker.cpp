#include <gtest/gtest.h>

#include <orbitgauge/tracker.hpp>

using namespace orbitgauge;

namespace {

ModulusCertificate offset(long o) {
    ModulusCertificate f;
    f.offset = o;
    return f;
}

Rational q(long a, long b) { return Rational(a, b); }

Rational pow2(long e) { return Dyadic::pow2(e).to_rational(); }

}  // namespace

TEST(Tracker, ScheduleExamples) {
    EXPECT_EQ(g_schedule(offset(1), 3, 10), (std::vector<long>{12, 14, 16}));
    EXPECT_EQ(g_schedule(offset(0), 3, 10), (std::vector<long>{11, 12, 13}));
    EXPECT_EQ(g_schedule(offset(2), 2, 8), (std::vector<long>{11, 14}));
    EXPECT_THROW(g_schedule(offset(1), 0, 10), ArgumentError);
    EXPECT_THROW(g_schedule(offset(1), 5000, 10, 4096), PrecisionExhausted);
}

TEST(Tracker, DoublingOneThirdMatchesExactOrbit) {
    auto sys = SystemSpec::doubling();
    auto t = track(sys, q(1, 3), 20, 30);
    ASSERT_EQ(t.steps.size(), 21u);
    Rational x = q(1, 3);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        Rational err = abs(t.steps[i].center.to_rational() - x);
        Rational d = std::min(err, Rational(1 - err));
        EXPECT_LT(d, pow2(-t.steps[i].radius_exp)) << i;
        x = step_exact(sys, x);
    }
    EXPECT_EQ(t.steps.back().radius_exp, 30);
}

TEST(Tracker, DyadicStartIsExact) {
    auto t = track(SystemSpec::tent(), q(3, 8), 10, 20);
    for (const auto& s : t.steps) EXPECT_TRUE(s.exact);
    Rational x = q(3, 8);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        EXPECT_EQ(t.steps[i].center.to_rational(), x) << i;
        x = step_exact(SystemSpec::tent(), x);
    }
}

TEST(Tracker, LogisticAgainstRationalOracle) {
    auto sys = SystemSpec::logistic(Dyadic(15, -2));
    Rational x = q(1, 3);
    auto t = track(sys, x, 10, 40);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        EXPECT_LT(abs(t.steps[i].center.to_rational() - x), pow2(-t.steps[i].radius_exp)) << i;
        x = step_exact(sys, x);
    }
}

TEST(Tracker, MannevilleAgreesWithFinerRun) {
    auto sys = SystemSpec::manneville(3, Dyadic(1, -1));
    auto coarse = track(sys, q(2, 7), 30, 20);
    auto fine = track(sys, q(2, 7), 30, 60);
    for (std::size_t i = 0; i < coarse.steps.size(); ++i) {
        Rational d = abs(coarse.steps[i].center.to_rational() - fine.steps[i].center.to_rational());
        d = std::min(d, Rational(1 - d));
        EXPECT_LT(d, pow2(-coarse.steps[i].radius_exp) + pow2(-fine.steps[i].radius_exp)) << i;
    }
}

TEST(Tracker, PrecisionCapRaises) {
    EXPECT_THROW(track(SystemSpec::doubling(), q(1, 3), 5000, 30), PrecisionExhausted);
}

TEST(Tracker, ReconstructRotation) {
    Dyadic r(mpz_class("9e3779b97f4a7c15", 16), -64);
    auto sys = SystemSpec::rotation(r);
    Cover c = uniform_cover(Space::circle, 5);  // radius 1/32
    for (long k : {64L, 512L, 4096L}) {
        auto sym = symbolic_orbit(sys, Rational(0), c, k + 1);
        auto est = reconstruct_rotation(sym, c);
        Rational err = abs(est.q - r.to_rational());
        EXPECT_LE(err, 2 * c.balls[0].radius / k) << k;
        EXPECT_GE(recovered_digits(r.to_rational(), est.q), static_cast<long>(std::log2(static_cast<double>(k))) - 8);
    }
}

TEST(Tracker, ReconstructRejectsBadInput) {
    Cover c = uniform_cover(Space::circle, 3);
    SymbolicString one;
    one.symbols = {0};
    EXPECT_THROW(reconstruct_rotation(one, c), ArgumentError);
    SymbolicString bad;
    bad.symbols = {0, 0, 0, 0};
    bad.alphabet = static_cast<std::uint32_t>(c.size());
    EXPECT_THROW(reconstruct_rotation(bad, c, q(1, 2)), InconsistentInput);
}

TEST(Tracker, RecoveredDigits) {
    EXPECT_EQ(recovered_digits(q(1, 2), q(1, 2) + pow2(-10)), 10);
    EXPECT_EQ(recovered_digits(q(1, 2), q(1, 2) + q(3, 4096)), 10);
    EXPECT_EQ(recovered_digits(q(0, 1), q(1, 3)), 1);
}

TEST(Tracker, TrackedSymbolicMatchesExactCoding) {
    auto sys = SystemSpec::doubling();
    Cover c = uniform_cover(Space::circle, 3);
    auto a = track_symbolic(sys, q(1, 5), c, 40);
    ASSERT_EQ(a.size(), 40u);
    Rational x = q(1, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(ball_contains(Space::circle, c.balls[a.symbols[i]], x)) << i;
        x = step_exact(sys, x);
    }
}
