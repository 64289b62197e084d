#include <gtest/gtest.h>

#include <orbitgauge/systems.hpp>

using namespace orbitgauge;

// Values from tests/oracles/manneville_xi.py (mpmath, 40 digits).
TEST(Manneville, BreakpointsMatchOracle) {
    struct Case {
        long z;
        Dyadic a;
        long k;
        const char* value;
    };
    const Case cases[] = {
        {3, Dyadic(1, -1), 1, "0.353553390593273762200422181052"},
        {3, Dyadic(1, -1), 2, "0.288675134594812882254574390251"},
        {3, Dyadic(1, -1), 10, "0.150755672288881811323406033485"},
        {3, Dyadic(1, -1), 1000, "0.0158034885310253492223308149774"},
        {4, Dyadic(1, -1), 2, "0.346680637175317352421676137393"},
        {4, Dyadic(1, -1), 100, "0.107365037404828333641547688609"},
        {5, Dyadic(3, -2), 7, "0.44595266812602040001906248896"},
    };
    for (const auto& c : cases) {
        SystemSpec s = SystemSpec::manneville(c.z, c.a);
        DyadicInterval xi = detail::manneville_xi(s, c.k, 120);
        Rational oracle = parse_rational(c.value);
        Rational tol(1, mpz_class(10) * mpz_class("1000000000000000000000000000"));  // 1e-28
        EXPECT_LE(xi.lo.to_rational(), oracle + tol) << c.z << " " << c.k;
        EXPECT_GE(xi.hi.to_rational(), oracle - tol) << c.z << " " << c.k;
        EXPECT_LT((xi.hi - xi.lo).to_rational(), tol);
    }
    // xi_0 = a, xi_-1 = 1
    SystemSpec s = SystemSpec::manneville(3, Dyadic(1, -1));
    EXPECT_EQ(detail::manneville_xi(s, 0, 64).lo, Dyadic(1, -1));
}

TEST(Manneville, BranchIndexBracketsThePoint) {
    SystemSpec s = SystemSpec::manneville(3, Dyadic(1, -1));
    for (long k : {1L, 2L, 5L, 77L, 4000L}) {
        DyadicInterval lo = detail::manneville_xi(s, k, 200), hi = detail::manneville_xi(s, k - 1, 200);
        Dyadic mid = (lo.hi + hi.lo).shifted(-1);
        EXPECT_EQ(detail::manneville_branch(s, mid), k);
    }
}

TEST(Manneville, RejectsBadParameters) {
    EXPECT_THROW(SystemSpec::manneville(2, Dyadic(1, -1)), ParameterError);
    EXPECT_THROW(SystemSpec::manneville(3, Dyadic(1)), ParameterError);
    EXPECT_THROW(SystemSpec::rotation(Dyadic(1)), ParameterError);
    EXPECT_THROW(SystemSpec::logistic(Dyadic(5)), ParameterError);
}

TEST(Systems, ExactStepsOnRationals) {
    EXPECT_EQ(step_exact(SystemSpec::doubling(), Rational(2, 3)), Rational(1, 3));
    EXPECT_EQ(step_exact(SystemSpec::tent(), Rational(2, 3)), Rational(2, 3));
    EXPECT_EQ(step_exact(SystemSpec::tent(), Rational(1, 5)), Rational(2, 5));
    EXPECT_EQ(step_exact(SystemSpec::rotation(Dyadic(3, -2)), Rational(1, 2)), Rational(1, 4));
    EXPECT_EQ(step_exact(SystemSpec::logistic(Dyadic(4)), Rational(1, 2)), Rational(1));
    EXPECT_THROW(check_in_space(SystemSpec::tent(), Rational(3, 2)), DomainError);
}

TEST(Systems, FeigenbaumConstantEnclosure) {
    // published value 3.5699456718709449018...; tests/oracles/feigenbaum.py
    DyadicInterval e = feigenbaum_lambda_enclosure();
    Rational published = parse_rational("3.5699456718709449018420051513864989");
    EXPECT_LE(e.lo.to_rational(), published);
    EXPECT_GE(e.hi.to_rational(), published);
}

TEST(Systems, ModulusOffsets) {
    EXPECT_EQ(modulus(SystemSpec::rotation(Dyadic(1, -3))).offset, 0);
    EXPECT_EQ(modulus(SystemSpec::doubling()).offset, 1);
    EXPECT_EQ(modulus(SystemSpec::tent()).offset, 1);
    EXPECT_EQ(modulus(SystemSpec::logistic_feigenbaum()).offset, 2);
    EXPECT_EQ(modulus(SystemSpec::manneville(3, Dyadic(1, -1))).offset, 2);
    EXPECT_EQ(modulus(SystemSpec::doubling())(10), 11);
}

// |T x - T y| <= 2^offset |x - y| on sampled pairs.
TEST(Systems, ModulusBoundsSampledSlopes) {
    for (auto s : {SystemSpec::doubling(), SystemSpec::tent(), SystemSpec::logistic_feigenbaum(),
                   SystemSpec::manneville(3, Dyadic(1, -1))}) {
        long off = modulus(s).offset;
        for (int i = 1; i < 200; ++i) {
            Dyadic x(i, -8), y = x + Dyadic::pow2(-30);
            Dyadic tx = eval_map(s, x, 80), ty = eval_map(s, y, 80);
            double d = distance(s.space, tx.to_rational(), ty.to_rational()).get_d();
            EXPECT_LE(d, std::ldexp(1.0, static_cast<int>(off - 30)) * 1.000001) << to_string(s.kind) << " " << i;
        }
    }
}

TEST(Systems, MannevilleEvaluationIsContinuousAcrossBreakpoints) {
    SystemSpec s = SystemSpec::manneville(3, Dyadic(1, -1));
    DyadicInterval xi = detail::manneville_xi(s, 3, 200);
    Dyadic left = xi.lo - Dyadic::pow2(-60), right = xi.hi + Dyadic::pow2(-60);
    Dyadic a = eval_map(s, left, 100), b = eval_map(s, right, 100);
    EXPECT_LT(distance(Space::circle, a.to_rational(), b.to_rational()), Rational(1, 1 << 20));
    // right branch: a -> 0 (mod 1), 3/4 -> 1/2
    EXPECT_EQ(eval_map(s, Dyadic(3, -2), 60), Dyadic(1, -1));
}

TEST(Systems, PrecisionCapFromEnvironment) {
    setenv("ORBITGAUGE_MAX_PREC_BITS", "777", 1);
    EXPECT_EQ(max_precision_bits(), 777);
    unsetenv("ORBITGAUGE_MAX_PREC_BITS");
    EXPECT_EQ(max_precision_bits(), 4096);
}
