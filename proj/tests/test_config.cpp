#include <gtest/gtest.h>

#include <orbitgauge/config.hpp>

using namespace orbitgauge;

namespace {

std::string error_of(const std::string& text) {
    Config c;
    try {
        c.parse(text, "t.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, SectionsAndComments) {
    Config c;
    c.parse("# start\n[system]\nkind = tent  # inline\n\n[orbit]\nx0 = 2/3\ncheckpoints = pow2:6..8\n", "t.cfg");
    EXPECT_EQ(c.raw("system.kind"), "tent");
    EXPECT_EQ(c.raw("orbit.x0"), "2/3");
    EXPECT_EQ(checkpoints_from(c), (std::vector<long>{64, 128, 256}));
    EXPECT_EQ(system_from(c).kind, MapKind::tent);
}

TEST(Config, FullKeysWithoutSection) {
    Config c;
    c.parse("system.kind = rotation\nsystem.r = 3/8\n");
    auto s = system_from(c);
    EXPECT_EQ(s.kind, MapKind::rotation);
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_NE(error_of("[system]\nkind = tent\nbogus line\n").find("t.cfg:3"), std::string::npos);
    EXPECT_NE(error_of("\n\n[system\n").find("t.cfg:3"), std::string::npos);
    std::string unk = error_of("[system]\ncolour = red\n");
    EXPECT_NE(unk.find("t.cfg:2"), std::string::npos);
    EXPECT_NE(unk.find("unknown key 'system.colour'"), std::string::npos);
}

TEST(Config, OverridesAndUnknownKeys) {
    Config c;
    c.apply_override("track.k = 7");
    EXPECT_EQ(c.get_long("track.k"), 7);
    EXPECT_THROW(c.apply_override("track.k"), ConfigError);
    EXPECT_THROW(c.apply_override("track.kk=3"), ConfigError);
    c.set("track.m", "abc");
    EXPECT_THROW(c.get_long("track.m"), ConfigError);
    c.set("entropy.nets", "maybe");
    EXPECT_THROW(c.get_bool("entropy.nets"), ConfigError);
}

TEST(Config, HashTracksResolvedValues) {
    Config a, b;
    EXPECT_EQ(a.hash_hex(), b.hash_hex());
    EXPECT_EQ(a.hash_hex().size(), 16u);
    b.set("run.seed", "1");
    EXPECT_NE(a.hash_hex(), b.hash_hex());
    b.set("run.seed", a.raw("run.seed"));
    EXPECT_EQ(a.hash_hex(), b.hash_hex());
}

TEST(Config, Ladders) {
    EXPECT_EQ(parse_ladder("k", "2..5"), (std::vector<long>{2, 3, 4, 5}));
    EXPECT_EQ(parse_ladder("k", "3, 9,27"), (std::vector<long>{3, 9, 27}));
    EXPECT_EQ(parse_ladder("k", "pow2:0..2"), (std::vector<long>{1, 2, 4}));
    EXPECT_THROW(parse_ladder("k", "5..2"), ConfigError);
    EXPECT_THROW(parse_ladder("k", "1,x"), ConfigError);
    EXPECT_THROW(parse_ladder("k", "pow2:0..40"), ConfigError);
}

TEST(Config, TypedViews) {
    Config c;
    c.set("system.kind", "manneville");
    c.set("system.z", "5");
    c.set("system.a", "1/4");
    EXPECT_EQ(system_from(c).kind, MapKind::manneville_pw);
    c.set("system.a", "1/3");
    EXPECT_THROW(system_from(c), ConfigError);
    c.set("system.kind", "henon");
    EXPECT_THROW(system_from(c), ConfigError);
    c.set("entropy.eps", "1/8, 1/32");
    auto e = eps_from(c);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_EQ(e[1], Rational(1, 32));
    c.set("orbit.policy", "beam");
    c.set("orbit.beam_width", "3");
    EXPECT_EQ(policy_from(c).beam_width, 3);
    c.set("cover.kind", "binary-nice");
    EXPECT_EQ(covers_from(c, Space::circle).front().id, "binary-nice");
}

TEST(Config, SeededPointsAreReproducible) {
    auto a = seeded_points(20240601, 4, 128);
    auto b = seeded_points(20240601, 4, 128);
    auto c = seeded_points(20240602, 4, 128);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_TRUE(a[i].sign() >= 0 && a[i] < Dyadic(1));
    }
    EXPECT_FALSE(a[0] == c[0]);
}
