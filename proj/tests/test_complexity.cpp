#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <orbitgauge/complexity.hpp>

using namespace orbitgauge;

namespace {

SymbolicString str(std::vector<std::uint32_t> v, std::uint32_t N = 2) {
    SymbolicString s;
    s.symbols = std::move(v);
    s.alphabet = N;
    return s;
}

SymbolicString random_bits(std::size_t n, std::uint64_t seed = 20240601) {
    std::mt19937_64 g(seed);
    std::vector<std::uint32_t> v(n);
    for (auto& b : v) b = static_cast<std::uint32_t>(g() & 1u);
    return str(std::move(v));
}

InfoProfile synthetic(const std::vector<long>& ns, double (*bits)(double)) {
    InfoProfile p;
    for (long n : ns) p.checkpoints.push_back({n, bits(static_cast<double>(n)), bits(static_cast<double>(n))});
    return p;
}

std::vector<long> pow2(long a, long b) {
    std::vector<long> v;
    for (long e = a; e <= b; ++e) v.push_back(1L << e);
    return v;
}

}  // namespace

TEST(Complexity, CodeLengthHelpers) {
    EXPECT_EQ(elias_gamma_length(1), 1);
    EXPECT_EQ(elias_gamma_length(4), 5);
    EXPECT_EQ(elias_delta_length(1), 1);
    EXPECT_EQ(elias_delta_length(16), 9);
    EXPECT_EQ(ceil_log2(5), 3);
    EXPECT_EQ(floor_log2(5), 2);
}

TEST(Complexity, EmptyStringHasZeroContent) {
    EXPECT_EQ(info_content(str({})), 0.0);
    EXPECT_EQ(cond_info_content(str({}), 0), 0.0);
    EXPECT_THROW(cond_info_content(str({0, 1}), 3), ArgumentError);
}

TEST(Complexity, ConstantStringIsCheap) {
    auto s = str(std::vector<std::uint32_t>(4096, 0));
    EXPECT_LE(info_content(s), 0.15 * 4096);
    EXPECT_LT(cond_info_content(s, 4096) / 4096, 0.15);
    // phrases are runs of length 1, 2, 3, ... so at most 91 of them
    InfoEstimator lz{EstimatorKind::lz78, 0};
    EXPECT_LE(cond_info_content(s, 4096, lz), 91.0 * (ceil_log2(91) + 1));
}

TEST(Complexity, PeriodicStringIsCheap) {
    std::vector<std::uint32_t> v(4096);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::uint32_t>(i & 1);
    auto s = str(v);
    EXPECT_LT(cond_info_content(s, 4096) / 4096, 0.2);
    EXPECT_LT(cond_info_content(s, 4096, {EstimatorKind::lz78, 0}) / 4096, 0.25);
}

TEST(Complexity, RandomBitsRate) {
    auto s = random_bits(1u << 16);
    double rate = info_content(s) / 65536.0;
    EXPECT_GE(rate, 0.85);
    EXPECT_LE(rate, 1.05);
}

TEST(Complexity, Lz78PhraseFormulaOnSmallString) {
    // 0|1|00|01|10|1 -> 6 phrases, the last one a repeat; N=2
    auto s = str({0, 1, 0, 0, 0, 1, 1, 0, 1});
    std::vector<std::size_t> ends{9};
    double got = detail::lz78_prefix_bits(s.symbols, 2, ends)[0];
    // phrase i costs ceil(log2 i) bits for the prefix index plus one symbol bit
    double want = 0;
    for (long i = 1; i <= 6; ++i) want += static_cast<double>(ceil_log2(static_cast<unsigned long long>(i))) + 1;
    EXPECT_NEAR(got, want, 1.0 + 1e-9);
}

TEST(Complexity, ConditionalBelowPlainAndHeaderBound) {
    for (std::size_t n : {1u, 7u, 100u, 5000u}) {
        auto s = random_bits(n, n);
        double c = cond_info_content(s, n), p = info_content(s);
        EXPECT_LE(c, p);
        EXPECT_LE(p - c, static_cast<double>(length_header_bits(n)) + 1e-9);
        EXPECT_LE(c, static_cast<double>(n) + 8);  // raw fallback plus selector
    }
}

TEST(Complexity, PrefixProfileIsMonotoneAndDeterministic) {
    auto s = random_bits(4096, 7);
    auto p = profile_of(s, pow2(4, 12));
    for (std::size_t i = 1; i < p.checkpoints.size(); ++i)
        EXPECT_GE(p.checkpoints[i].bits_conditional, p.checkpoints[i - 1].bits_conditional);
    auto q = profile_of(s, pow2(4, 12));
    for (std::size_t i = 0; i < p.checkpoints.size(); ++i)
        EXPECT_EQ(p.checkpoints[i].bits_plain, q.checkpoints[i].bits_plain);
    EXPECT_DOUBLE_EQ(p.checkpoints.back().bits_conditional, cond_info_content(s, 4096));
}

TEST(Complexity, IndicatorExamples) {
    auto ns = pow2(6, 14);
    auto lin = synthetic(ns, [](double n) { return n; });
    EXPECT_NEAR(complexity_indicator(lin, ScalingFunction::identity(), InfoMode::plain), 1.0, 1e-12);
    auto root = synthetic(ns, [](double n) { return std::sqrt(n); });
    EXPECT_NEAR(complexity_indicator(root, ScalingFunction::power(0.5), InfoMode::plain), 1.0, 1e-9);
    EXPECT_NEAR(ratio_indicator(root, ScalingFunction::power(0.5), InfoMode::plain), 1.0, 1e-12);
    auto flat = synthetic(ns, [](double) { return 17.0; });
    EXPECT_EQ(complexity_indicator(flat, ScalingFunction::identity(), InfoMode::conditional), 0.0);
    EXPECT_LE(ratio_indicator(flat, ScalingFunction::identity(), InfoMode::plain), 17.0 / 1024);
    auto three = synthetic(pow2(1, 3), [](double n) { return n; });
    EXPECT_THROW(complexity_indicator(three, ScalingFunction::identity(), InfoMode::plain), ArgumentError);
}

TEST(Complexity, GrowthExponentFit) {
    auto ns = pow2(6, 16);
    auto g1 = fit_growth_exponent(synthetic(ns, [](double n) { return n; }));
    EXPECT_NEAR(g1.alpha, 1.0, 1e-9);
    auto g2 = fit_growth_exponent(synthetic(ns, [](double n) { return std::sqrt(n); }));
    EXPECT_NEAR(g2.alpha, 0.5, 1e-9);
    auto withzero = synthetic(ns, [](double n) { return n; });
    withzero.checkpoints.back().bits_conditional = 0;
    EXPECT_EQ(fit_growth_exponent(withzero).excluded, 1u);
    EXPECT_THROW(fit_growth_exponent(synthetic(pow2(6, 10), [](double n) { return n; })), ArgumentError);
}

TEST(Complexity, ScalingFunctionNames) {
    for (const auto& f : default_scaling_family()) {
        auto g = ScalingFunction::parse(f.name());
        EXPECT_EQ(g.name(), f.name());
        EXPECT_DOUBLE_EQ(g(1024.0), f(1024.0));
    }
    EXPECT_THROW(ScalingFunction::parse("cubic"), ArgumentError);
}

TEST(Complexity, FixedPointOrbitBoundedOverLadder) {
    auto sup = sup_over_covers(SystemSpec::tent(), Rational(2, 3), cover_ladder(Space::interval, 1, 4),
                               ScalingFunction::identity(), InfoMode::conditional, pow2(6, 12));
    EXPECT_EQ(sup.value, 0.0);
    double cmax = 0;
    for (const auto& p : sup.profiles)
        for (const auto& c : p.checkpoints) cmax = std::max(cmax, c.bits_conditional);
    EXPECT_LT(cmax, 64.0);
}

TEST(Complexity, IdenticalCoversMatchSingleCover) {
    auto sys = SystemSpec::doubling();
    Rational x(1234567, 8388608 + 1);
    Cover c = uniform_cover(Space::circle, 2);
    auto one = sup_over_covers(sys, x, {c}, ScalingFunction::identity(), InfoMode::plain, pow2(6, 11));
    auto two = sup_over_covers(sys, x, {c, c}, ScalingFunction::identity(), InfoMode::plain, pow2(6, 11));
    EXPECT_EQ(one.value, two.value);
}

TEST(Complexity, DoublingGenericPointNearOneBit) {
    // a 4096-bit seeded dyadic start keeps the orbit exact for 4096 steps
    std::mt19937_64 g(20240601);
    mpz_class m = 0;
    for (int w = 0; w < 64; ++w) {
        m <<= 64;
        m += mpz_class(std::to_string(g()));
    }
    Rational x(m, mpz_class(1) << 4096);
    x.canonicalize();
    auto p = orbit_info_profile(SystemSpec::doubling(), x, binary_nice_cover(Space::circle), {4096},
                                CodingPolicy::nice());
    double rate = p.checkpoints.back().bits_plain / 4096;
    EXPECT_GE(rate, 0.8);
    EXPECT_LE(rate, 1.1);
}
