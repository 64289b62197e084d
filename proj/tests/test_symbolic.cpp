#include <gtest/gtest.h>

#include <orbitgauge/symbolic.hpp>

using namespace orbitgauge;

namespace {

std::string text(const SymbolicString& s) {
    std::string out;
    for (auto v : s.symbols) out += static_cast<char>('0' + v);
    return out;
}

}  // namespace

TEST(Symbolic, DoublingOneThirdAlternates) {
    auto s = symbolic_orbit(SystemSpec::doubling(), Rational(1, 3), binary_cover(Space::circle), 8);
    EXPECT_EQ(text(s), "01010101");
    auto n = symbolic_orbit(SystemSpec::doubling(), Rational(1, 3), binary_cover(Space::circle), 8,
                            CodingPolicy::nice());
    EXPECT_EQ(n.size(), 8u);
    EXPECT_EQ(n.policy, "nice");
}

TEST(Symbolic, FixedPointGivesConstantString) {
    auto s = symbolic_orbit(SystemSpec::tent(), Rational(2, 3), uniform_cover(Space::interval, 3), 64);
    for (auto v : s.symbols) EXPECT_EQ(v, s.symbols[0]);
    auto z = symbolic_orbit(SystemSpec::doubling(), Rational(0), uniform_cover(Space::circle, 4), 32);
    for (auto v : z.symbols) EXPECT_EQ(v, z.symbols[0]);
}

TEST(Symbolic, QuarterRotationHasPeriodFour) {
    auto rot = SystemSpec::rotation(Dyadic(1, -2));
    Cover c = uniform_cover(Space::circle, 1);  // four balls of radius 1/2
    auto s = symbolic_orbit(rot, Rational(0), c, 40);
    ASSERT_EQ(s.size(), 40u);
    for (std::size_t i = 4; i < s.size(); ++i) EXPECT_EQ(s.symbols[i], s.symbols[i - 4]);
    // period is exactly 4 on a finer cover
    auto f = symbolic_orbit(rot, Rational(0), uniform_cover(Space::circle, 3), 8);
    EXPECT_EQ(text(f), text(f.prefix(4)) + text(f.prefix(4)));
    EXPECT_NE(f.symbols[0], f.symbols[1]);
    EXPECT_NE(f.symbols[0], f.symbols[2]);
}

TEST(Symbolic, RefinementMapsFineCodingOntoCoarseBalls) {
    // weak functoriality: the coarse ball picked by refine_map still holds the point
    auto sys = SystemSpec::doubling();
    Cover fine = uniform_cover(Space::circle, 5), coarse = uniform_cover(Space::circle, 3);
    auto m = refine_map(fine, coarse);
    ASSERT_TRUE(m.has_value());
    Rational x(7, 113);
    auto s = symbolic_orbit(sys, x, fine, 60);
    Rational y = x;
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_TRUE(ball_contains(Space::circle, coarse.balls[(*m)[s.symbols[i]]], y)) << i;
        y = step_exact(sys, y);
    }
}

TEST(Symbolic, BeamCodingIsValidAndNoWorse) {
    auto sys = SystemSpec::tent();
    Cover c = uniform_cover(Space::interval, 2);
    Rational x(5, 37);
    auto canon = symbolic_orbit(sys, x, c, 80);
    auto beam = symbolic_orbit(sys, x, c, 80, CodingPolicy::beam(4));
    ASSERT_EQ(beam.size(), 80u);
    Rational y = x;
    for (std::size_t i = 0; i < beam.size(); ++i) {
        EXPECT_TRUE(ball_contains(Space::interval, c.balls[beam.symbols[i]], y)) << i;
        EXPECT_TRUE(ball_contains(Space::interval, c.balls[canon.symbols[i]], y)) << i;
        y = step_exact(sys, y);
    }
    auto again = symbolic_orbit(sys, x, c, 80, CodingPolicy::beam(4));
    EXPECT_EQ(again.symbols, beam.symbols);
}

TEST(Symbolic, Errors) {
    EXPECT_THROW(symbolic_orbit(SystemSpec::doubling(), Rational(1, 3), uniform_cover(Space::interval, 2), 4),
                 ArgumentError);
    Cover gap;
    gap.space = Space::interval;
    gap.balls = {{Rational(1, 10), Rational(1, 20)}};
    gap.id = "gap";
    EXPECT_THROW(symbolic_orbit(SystemSpec::tent(), Rational(1, 2), gap, 4), InvalidCover);
    EXPECT_EQ(symbolic_orbit(SystemSpec::tent(), Rational(1, 2), uniform_cover(Space::interval, 1), 0).size(), 0u);
}

TEST(Symbolic, GenericPointsCodeWithDyadicEnclosures) {
    // irrational-like rational start, long orbit through interval arithmetic
    auto s = symbolic_orbit(SystemSpec::logistic(Dyadic(15, -2)), Rational(123456789, 1000000007),
                            uniform_cover(Space::interval, 3), 2000);
    EXPECT_EQ(s.size(), 2000u);
    EXPECT_EQ(s.alphabet, 17u);
}
