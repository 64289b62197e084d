#include <gtest/gtest.h>

#include <orbitgauge/cover.hpp>

using namespace orbitgauge;

namespace {

Cover make(Space sp, std::vector<Ball> b) {
    Cover c;
    c.space = sp;
    c.balls = std::move(b);
    c.id = "t";
    return c;
}

Rational q(long a, long b) { return Rational(a, b); }

}  // namespace

TEST(Cover, MinSubcoverThreeBallsTwoSuffice) {
    Cover c = make(Space::interval, {{q(1, 4), q(3, 10)}, {q(1, 2), q(1, 5)}, {q(3, 4), q(3, 10)}});
    EXPECT_EQ(min_subcover_count(c), 2);
    EXPECT_EQ(min_subcover_brute(c), 2);
}

TEST(Cover, MinSubcoverMinimalAndSingle) {
    Cover c = make(Space::interval, {{q(1, 6), q(1, 5)}, {q(1, 2), q(1, 5)}, {q(5, 6), q(1, 5)}});
    EXPECT_EQ(min_subcover_count(c), 3);
    EXPECT_EQ(min_subcover_count(make(Space::interval, {{q(1, 2), q(3, 4)}})), 1);
    EXPECT_EQ(min_subcover_count(make(Space::circle, {{q(0, 1), q(3, 5)}})), 1);
}

TEST(Cover, NonCoveringRejected) {
    Cover gap = make(Space::interval, {{q(1, 4), q(1, 4)}, {q(3, 4), q(1, 4)}});  // misses 1/2
    EXPECT_FALSE(covers(gap));
    EXPECT_THROW(min_subcover_count(gap), InvalidCover);
    EXPECT_THROW(lebesgue_number(gap), InvalidCover);
}

TEST(Cover, GreedyMatchesBruteForceOnLadders) {
    for (Space sp : {Space::interval, Space::circle})
        for (long j = 0; j <= 3; ++j) {
            Cover c = uniform_cover(sp, j);
            EXPECT_EQ(min_subcover_count(c), min_subcover_brute(c)) << j;
        }
}

TEST(Cover, IsNiceExamples) {
    Cover a = make(Space::interval, {{q(0, 1), q(2, 5)}, {q(1, 3), q(2, 5)}, {q(2, 3), q(2, 5)}, {q(1, 1), q(2, 5)}});
    EXPECT_TRUE(is_nice(a));
    Cover b = make(Space::interval, {{q(1, 4), q(1, 2)}, {q(3, 4), q(1, 2)}});
    EXPECT_FALSE(is_nice(b));
    EXPECT_TRUE(is_nice(make(Space::interval, {{q(1, 2), q(3, 1)}})));
    for (long j = 0; j <= 6; ++j) EXPECT_TRUE(is_nice(uniform_cover(Space::circle, j))) << j;
}

TEST(Cover, BinaryCovers) {
    EXPECT_FALSE(is_nice(binary_cover(Space::circle)));
    EXPECT_TRUE(covers(binary_cover(Space::circle)));
    EXPECT_TRUE(is_nice(binary_nice_cover(Space::circle)));
    EXPECT_TRUE(is_nice(binary_nice_cover(Space::interval)));
}

TEST(Cover, LebesgueNumberExamples) {
    // (-1/5, 3/5) and (2/5, 6/5): the overlap (2/5, 3/5) gives 1/10
    Cover two = make(Space::interval, {{q(1, 5), q(2, 5)}, {q(4, 5), q(2, 5)}});
    EXPECT_EQ(lebesgue_number(two), q(1, 10));
    EXPECT_EQ(lebesgue_number(uniform_cover(Space::circle, 8)), q(3, 1024));
    EXPECT_EQ(lebesgue_number(uniform_cover(Space::circle, 3)), q(3, 32));
    // one ball (-1/4, 5/4): every point sits 1/4 inside
    EXPECT_EQ(lebesgue_number(make(Space::interval, {{q(1, 2), q(3, 4)}})), q(1, 4));
    for (long j = 1; j <= 6; ++j) {
        Cover u = uniform_cover(Space::circle, j);
        Rational rho = u.balls[0].radius;
        EXPECT_GE(lebesgue_number(u), rho / 2) << j;
    }
}

TEST(Cover, LebesgueAgreesWithGridOracle) {
    // delta = min over x of max over balls of the distance from x to the ball's edge
    Cover c = make(Space::circle, {{q(1, 10), q(1, 5)}, {q(2, 5), q(3, 16)}, {q(7, 10), q(1, 4)}});
    ASSERT_TRUE(covers(c));
    Rational best = 2;
    const long G = 4000;
    for (long i = 0; i < G; ++i) {
        Rational x(i, G);
        Rational m = 0;
        for (const auto& b : c.balls) {
            Rational d = distance(Space::circle, x, b.center);
            if (b.radius - d > m) m = b.radius - d;
        }
        if (m < best) best = m;
    }
    Rational got = lebesgue_number(c);
    EXPECT_LE(got, best);
    EXPECT_GT(got, best - q(1, 2000));
}

TEST(Cover, SerializeRoundTrip) {
    Cover c = make(Space::circle, {{q(1, 3), q(1, 7)}, {q(3, 4), q(5, 11)}});
    std::string text = serialize(c);
    Cover back = parse_cover(text, Space::circle);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back.balls[i].center, c.balls[i].center);
        EXPECT_EQ(back.balls[i].radius, c.balls[i].radius);
    }
    EXPECT_EQ(serialize(back), text);
    EXPECT_ANY_THROW(parse_cover("1/2\n", Space::interval));
}

TEST(Cover, JoinBasics) {
    Cover u = make(Space::interval, {{q(1, 5), q(2, 5)}, {q(4, 5), q(2, 5)}});
    Cover uu = join(u, u);
    // idempotent up to the pieces u_i ∩ u_j
    for (const auto& b : u.balls) {
        bool found = false;
        for (const auto& e : uu.balls) found = found || (e.center == b.center && e.radius == b.radius);
        EXPECT_TRUE(found);
    }
    Cover v = uniform_cover(Space::interval, 2);
    EXPECT_LE(join(u, v).size(), u.size() * v.size());
    EXPECT_TRUE(covers(join(u, v)));
}

TEST(Cover, JoinOnCircleSplitsWrappedPieces) {
    // two arcs meeting in two separate pieces
    Cover a = make(Space::circle, {{q(0, 1), q(2, 5)}});
    Cover b = make(Space::circle, {{q(1, 2), q(2, 5)}});
    EXPECT_EQ(join(a, b).size(), 2u);
}

TEST(Cover, RefineMap) {
    for (long j = 1; j <= 4; ++j) {
        Cover coarse = uniform_cover(Space::circle, j);
        Cover fine = uniform_cover(Space::circle, j + 1);
        auto m = refine_map(fine, coarse);
        ASSERT_TRUE(m.has_value()) << j;
        EXPECT_EQ(m->size(), fine.size());
    }
    Cover u = uniform_cover(Space::interval, 3);
    auto id = refine_map(u, u);
    ASSERT_TRUE(id.has_value());
    // lowest containing index: the clipped end balls may land on a neighbour
    for (std::size_t i = 0; i < id->size(); ++i) {
        EXPECT_LE((*id)[i], i);
        EXPECT_TRUE(ball_within(Space::interval, u.balls[i], u.balls[(*id)[i]]));
    }
    auto cid = refine_map(uniform_cover(Space::circle, 3), uniform_cover(Space::circle, 3));
    ASSERT_TRUE(cid.has_value());
    for (std::size_t i = 0; i < cid->size(); ++i) EXPECT_EQ((*cid)[i], i);
    Cover left = make(Space::interval, {{q(1, 10), q(1, 20)}});
    Cover right = make(Space::interval, {{q(9, 10), q(1, 20)}});
    EXPECT_FALSE(refine_map(left, right).has_value());
    EXPECT_FALSE(refine_map(uniform_cover(Space::circle, 2), uniform_cover(Space::interval, 2)).has_value());
}

TEST(Cover, SubcoverCountSubadditiveUnderJoin) {
    for (Space sp : {Space::interval, Space::circle})
        for (long i = 0; i <= 2; ++i)
            for (long j = 0; j <= 2; ++j) {
                Cover u = uniform_cover(sp, i), v = uniform_cover(sp, j);
                EXPECT_LE(min_subcover_count(join(u, v)), min_subcover_count(u) * min_subcover_count(v));
            }
}

TEST(Cover, LadderShape) {
    auto l = cover_ladder(Space::circle, 1, 3);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0].size(), 4u);
    EXPECT_EQ(l[2].size(), 16u);
    EXPECT_EQ(uniform_cover(Space::interval, 1).size(), 5u);
    EXPECT_THROW(cover_ladder(Space::circle, 3, 1), ArgumentError);
}
