#include <gtest/gtest.h>

#include <random>

#include <orbitgauge/dyadic.hpp>
#include <orbitgauge/interval.hpp>

using namespace orbitgauge;

TEST(Dyadic, NormalizesToOddMantissa) {
    Dyadic d(mpz_class(12), 0);
    EXPECT_EQ(d.mantissa(), 3);
    EXPECT_EQ(d.exponent(), 2);
    EXPECT_TRUE(Dyadic(0).is_zero());
    EXPECT_EQ(Dyadic(0), Dyadic(mpz_class(0), -40));
}

TEST(Dyadic, ArithmeticIsExact) {
    Dyadic a(3, -3), b(5, -4);  // 3/8, 5/16
    EXPECT_EQ((a + b).to_rational(), Rational(11, 16));
    EXPECT_EQ((a - b).to_rational(), Rational(1, 16));
    EXPECT_EQ((a * b).to_rational(), Rational(15, 128));
    EXPECT_LT(b, a);
    EXPECT_EQ(cmp(a, Rational(3, 8)), 0);
    EXPECT_LT(cmp(b, Rational(1, 3)), 0);
}

TEST(Dyadic, DirectedRounding) {
    Rational third(1, 3);
    Dyadic lo = floor_to(third, 20), hi = ceil_to(third, 20);
    EXPECT_LT(lo.to_rational(), third);
    EXPECT_GT(hi.to_rational(), third);
    EXPECT_EQ(hi - lo, Dyadic::pow2(-20));
    Dyadic x(mpz_class(-7), -3);  // -7/8
    EXPECT_EQ(x.floor_to(1).to_rational(), Rational(-1));
    EXPECT_EQ(x.ceil_to(1).to_rational(), Rational(-1, 2));
    EXPECT_EQ(x.floor(), -1);
    EXPECT_EQ(x.frac().to_rational(), Rational(1, 8));
    Dyadic q = div_round(Dyadic(1), Dyadic(3), 30, -1), r = div_round(Dyadic(1), Dyadic(3), 30, +1);
    EXPECT_LT(q.to_rational(), third);
    EXPECT_GT(r.to_rational(), third);
}

TEST(Dyadic, HexRoundTrip) {
    Dyadic d(3, -2);
    EXPECT_EQ(d.to_hex(), "0x3p-2");
    EXPECT_EQ(parse_dyadic(d.to_hex()), d);
    EXPECT_EQ(parse_dyadic("-0x5p+3"), Dyadic(-40));
}

TEST(Dyadic, ParsesRationalForms) {
    EXPECT_EQ(parse_rational("3/4"), Rational(3, 4));
    EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
    EXPECT_EQ(parse_rational("075"), Rational(75));  // decimal, not octal
    EXPECT_EQ(parse_rational("1e-2"), Rational(1, 100));
    EXPECT_EQ(parse_rational(" 0x3p-2 "), Rational(3, 4));
    EXPECT_THROW(parse_rational("abc"), Error);
    EXPECT_THROW(parse_rational("1/0"), Error);
    EXPECT_THROW(parse_dyadic("1/3"), Error);
}

TEST(Dyadic, HexBitsAreBinaryFractions) {
    EXPECT_EQ(dyadic_from_hex_bits("8").to_rational(), Rational(1, 2));
    EXPECT_EQ(dyadic_from_hex_bits("c0").to_rational(), Rational(3, 4));
    EXPECT_EQ(dyadic_from_hex_bits("9e3779b97f4a7c15").exponent() >= -64, true);
}

TEST(Dyadic, DoubleConversionBrackets) {
    Dyadic d = Dyadic(1) + Dyadic::pow2(-80);
    EXPECT_LE(d.to_double_down(), 1.0);
    EXPECT_GT(d.to_double_up(), 1.0);
    EXPECT_EQ(Dyadic::from_double(0.375), Dyadic(3, -3));
}

// Outward rounding: the exact rational result lies in the interval result.
TEST(Interval, DoubleArithEnclosesExactResults) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3, 3);
    DoubleArith ar;
    for (int t = 0; t < 2000; ++t) {
        double a = u(rng), b = u(rng);
        Rational qa(a), qb(b);
        auto check = [&](const DoubleInterval& I, const Rational& q) {
            EXPECT_LE(Rational(I.lo), q);
            EXPECT_GE(Rational(I.hi), q);
        };
        check(ar.add(ar.point(a), ar.point(b)), qa + qb);
        check(ar.sub(ar.point(a), ar.point(b)), qa - qb);
        check(ar.mul(ar.point(a), ar.point(b)), qa * qb);
        if (b != 0) check(ar.div(ar.point(a), ar.point(b)), qa / qb);
    }
}

TEST(Interval, ExactOperationsStayPoints) {
    DoubleArith ar;
    auto s = ar.add(ar.point(0.25), ar.point(0.5));
    EXPECT_EQ(s.lo, 0.75);
    EXPECT_EQ(s.hi, 0.75);
}

TEST(Interval, DyadicArithRoundsOutward) {
    DyadicArith ar{40};
    auto third = ar.div(ar.point(Dyadic(1)), ar.point(Dyadic(3)));
    EXPECT_LT(third.lo.to_rational(), Rational(1, 3));
    EXPECT_GT(third.hi.to_rational(), Rational(1, 3));
    DyadicArith ex{-1};
    EXPECT_TRUE(ex.exact());
    auto p = ex.mul(ex.point(Dyadic(3, -5)), ex.point(Dyadic(7, -3)));
    EXPECT_EQ(p.lo, p.hi);
}
