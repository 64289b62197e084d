#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyadic.hpp"
#include "errors.hpp"
#include "systems.hpp"

namespace orbitgauge {

struct Ball {
    Rational center;
    Rational radius;
};

struct Cover {
    Space space = Space::interval;
    std::vector<Ball> balls;
    std::string id;

    std::size_t size() const { return balls.size(); }
};

// Open ambient interval (lo, hi); on the circle a lifted arc with lo in [0,1).
struct Arc {
    Rational lo;
    Rational hi;
    bool full = false;  // the whole circle
};

inline Rational frac(const Rational& x) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    Rational r = x - f;
    r.canonicalize();
    return r;
}

inline Arc to_arc(Space sp, const Ball& b) {
    if (sp == Space::circle) {
        if (b.radius > Rational(1, 2)) return {0, 1, true};
        Rational lo = frac(b.center - b.radius);
        return {lo, lo + 2 * b.radius, false};
    }
    return {b.center - b.radius, b.center + b.radius, false};
}

inline Ball to_ball(Space sp, const Arc& a) {
    if (a.full) return {Rational(1, 2), Rational(1)};
    Rational c = (a.lo + a.hi) / 2;
    if (sp == Space::circle) c = frac(c);
    Rational r = (a.hi - a.lo) / 2;
    c.canonicalize();
    r.canonicalize();
    return {c, r};
}

inline bool ball_contains(Space sp, const Ball& b, const Rational& x) {
    return distance(sp, x, b.center) < b.radius;
}

// Diameter of the part of a ball that lies in the phase space.
inline Rational trace_diameter(Space sp, const Ball& b) {
    if (sp == Space::circle) return std::min(Rational(2 * b.radius), Rational(1, 2));
    Rational lo = std::max(Rational(b.center - b.radius), Rational(0));
    Rational hi = std::min(Rational(b.center + b.radius), Rational(1));
    return hi > lo ? Rational(hi - lo) : Rational(0);
}

inline Rational max_diameter(const Cover& c) {
    Rational d = 0;
    for (const auto& b : c.balls) d = std::max(d, trace_diameter(c.space, b));
    return d;
}

inline std::string format_number(const Rational& q) {
    Dyadic d;
    if (as_dyadic(q, d)) return d.to_hex();
    return q.get_str();
}

// Text form: one "center radius" line per ball.
inline std::string serialize(const Cover& c) {
    std::string out;
    for (const auto& b : c.balls) out += format_number(b.center) + " " + format_number(b.radius) + "\n";
    return out;
}

inline Cover parse_cover(const std::string& text, Space sp, std::string id = "custom") {
    Cover c;
    c.space = sp;
    c.id = std::move(id);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra))
            throw ArgumentError("cover line " + std::to_string(lineno) + ": expected 'center radius'");
        Ball ball{parse_rational(a), parse_rational(b)};
        if (ball.radius <= 0) throw ArgumentError("cover line " + std::to_string(lineno) + ": radius must be positive");
        c.balls.push_back(ball);
    }
    return c;
}

// Uniform cover: radius 2^-j, centers on the 2^-(j+1) grid.
inline Cover uniform_cover(Space sp, long j) {
    if (j < 0 || j > 24) throw ArgumentError("ladder level out of range");
    Cover c;
    c.space = sp;
    c.id = "ladder-j" + std::to_string(j);
    long count = 1L << (j + 1);
    Rational r = Dyadic::pow2(-j).to_rational();
    long last = sp == Space::circle ? count - 1 : count;
    for (long k = 0; k <= last; ++k) c.balls.push_back({Dyadic(k, -(j + 1)).to_rational(), r});
    return c;
}

inline std::vector<Cover> cover_ladder(Space sp, long j_min, long j_max) {
    if (j_min > j_max) throw ArgumentError("empty cover ladder");
    std::vector<Cover> out;
    for (long j = j_min; j <= j_max; ++j) out.push_back(uniform_cover(sp, j));
    return out;
}

// Two balls around 1/4 and 3/4. The plain version overlaps by 1/32; the
// nice version has radius 1/2 + 1/64 so the halved balls still cover (on the
// circle each of its balls is then the whole space).
inline Cover binary_cover(Space sp, bool nice = false) {
    Cover c;
    c.space = sp;
    c.id = nice ? "binary-nice" : "binary";
    Rational r = nice ? Rational(1, 2) + Rational(1, 64) : Rational(1, 4) + Rational(1, 64);
    c.balls = {{Rational(1, 4), r}, {Rational(3, 4), r}};
    return c;
}

inline Cover binary_nice_cover(Space sp) { return binary_cover(sp, true); }

inline Cover halved(const Cover& c) {
    Cover h = c;
    for (auto& b : h.balls) b.radius /= 2;
    h.id = c.id + "/2";
    return h;
}

namespace detail {

struct Span {
    Rational lo, hi;
};

// Greedy cover of the closed segment [s, e] by open spans; nullopt if some
// point stays uncovered.
inline std::optional<long> greedy_segment(std::vector<Span> spans, const Rational& s, const Rational& e) {
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });
    Rational p = s;
    long count = 0;
    std::size_t i = 0;
    bool have = false;
    Rational best;
    while (true) {
        while (i < spans.size() && spans[i].lo < p) {
            if (!have || spans[i].hi > best) {
                best = spans[i].hi;
                have = true;
            }
            ++i;
        }
        if (!have || !(best > p)) return std::nullopt;
        ++count;
        if (best > e) return count;
        p = best;
    }
}

inline std::vector<Span> lifted_spans(const Cover& c) {
    std::vector<Span> out;
    for (const auto& b : c.balls) {
        Arc a = to_arc(c.space, b);
        if (c.space == Space::circle) {
            for (int t = -1; t <= 1; ++t) out.push_back({a.lo + t, a.hi + t});
        } else {
            out.push_back({a.lo, a.hi});
        }
    }
    return out;
}

}  // namespace detail

// Exact minimum subcover size, or nullopt when the balls do not cover.
inline std::optional<long> try_min_subcover(const Cover& c) {
    if (c.balls.empty()) return std::nullopt;
    if (c.space == Space::interval) {
        std::vector<detail::Span> spans;
        for (const auto& b : c.balls) spans.push_back({b.center - b.radius, b.center + b.radius});
        return detail::greedy_segment(spans, 0, 1);
    }
    for (const auto& b : c.balls)
        if (to_arc(c.space, b).full) return 1;
    auto spans = detail::lifted_spans(c);
    std::optional<long> best;
    for (const auto& s : spans) {
        if (!(s.lo < 0 && 0 < s.hi)) continue;  // arcs through the point 0
        auto rest = detail::greedy_segment(spans, s.hi, s.lo + 1);
        if (rest && (!best || *rest + 1 < *best)) best = *rest + 1;
    }
    return best;
}

inline bool covers(const Cover& c) { return try_min_subcover(c).has_value(); }

inline long min_subcover_count(const Cover& c) {
    auto n = try_min_subcover(c);
    if (!n) throw InvalidCover("balls of '" + c.id + "' do not cover the phase space");
    return *n;
}

// Reference answer by enumeration over subsets (small covers only).
inline long min_subcover_brute(const Cover& c) {
    if (c.size() > 20) throw SizeError("brute-force subcover search limited to 20 balls");
    long best = -1;
    std::size_t n = c.size();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        long pc = __builtin_popcount(mask);
        if (best >= 0 && pc >= best) continue;
        Cover sub;
        sub.space = c.space;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.balls.push_back(c.balls[i]);
        if (covers(sub)) best = pc;
    }
    if (best < 0) throw InvalidCover("balls do not cover the phase space");
    return best;
}

namespace detail {

// Balls sorted by centre, queried by a window around a point.
class CentreIndex {
public:
    explicit CentreIndex(const Cover& c) : c_(c) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            keys_.push_back({c.balls[i].center.get_d(), i});
            rmax_ = std::max(rmax_, c.balls[i].radius.get_d());
        }
        std::sort(keys_.begin(), keys_.end());
    }

    // Indices of balls whose centre lies within rmax of x (with slack).
    template <class F>
    void near(double x, F&& f, double reach = 1) const {
        double w = reach * rmax_ + 1e-9;
        if (c_.space == Space::circle && w >= 0.5) {
            for (const auto& k : keys_) f(k.second);
            return;
        }
        auto scan = [&](double lo, double hi) {
            auto it = std::lower_bound(keys_.begin(), keys_.end(), std::make_pair(lo, std::size_t{0}));
            for (; it != keys_.end() && it->first <= hi; ++it) f(it->second);
        };
        scan(x - w, x + w);
        if (c_.space == Space::circle) {
            if (x - w < 0) scan(x - w + 1, 2);
            if (x + w > 1) scan(-1, x + w - 1);
        }
    }

private:
    const Cover& c_;
    std::vector<std::pair<double, std::size_t>> keys_;
    double rmax_ = 0;
};

}  // namespace detail

// Largest delta such that every delta-ball around a point of the space lies
// in one cover ball. Exact: the depth max_i (r_i - d(x, c_i)) is piecewise
// linear and its minima sit at domain ends, antipodes of centres, or where a
// falling side meets a rising side of two overlapping balls.
inline Rational lebesgue_number(const Cover& c) {
    if (!covers(c)) throw InvalidCover("balls of '" + c.id + "' do not cover the phase space");
    detail::CentreIndex idx(c);
    std::vector<Rational> cand;
    if (c.space == Space::interval) {
        cand.push_back(0);
        cand.push_back(1);
    } else {
        for (const auto& b : c.balls) cand.push_back(frac(b.center + Rational(1, 2)));
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Ball& bi = c.balls[i];
        idx.near(bi.center.get_d(), [&](std::size_t j) {
            const Ball& bj = c.balls[j];
            if (distance(c.space, bi.center, bj.center) >= bi.radius + bj.radius) return;
            if (j == i) return;
            for (int t = -1; t <= 1; ++t) {
                if (c.space == Space::interval && t != 0) continue;
                Rational x = (bi.center + bi.radius + bj.center + t - bj.radius) / 2;
                if (c.space == Space::circle)
                    x = frac(x);
                else if (x < 0 || x > 1)
                    continue;
                cand.push_back(x);
            }
        }, 2);
    }
    bool have = false;
    Rational best;
    for (const auto& x : cand) {
        bool got = false;
        Rational depth;
        idx.near(x.get_d(), [&](std::size_t j) {
            Rational v = c.balls[j].radius - distance(c.space, x, c.balls[j].center);
            if (!got || v > depth) {
                depth = v;
                got = true;
            }
        });
        if (!got) depth = 0;
        if (!have || depth < best) {
            best = depth;
            have = true;
        }
    }
    if (best <= 0) throw InvalidCover("balls of '" + c.id + "' do not cover the phase space");
    return best;
}

inline bool is_nice(const Cover& c) { return covers(halved(c)); }

namespace detail {

inline std::vector<Arc> intersect(Space sp, const Arc& a, const Arc& b) {
    if (a.full) return {b};
    if (b.full) return {a};
    std::vector<Arc> out;
    for (int t = -1; t <= 1; ++t) {
        if (sp == Space::interval && t != 0) continue;
        Rational lo = std::max(a.lo, Rational(b.lo + t));
        Rational hi = std::min(a.hi, Rational(b.hi + t));
        if (!(lo < hi)) continue;
        if (sp == Space::interval) {
            if (hi <= 0 || lo >= 1) continue;
        } else {
            Rational f = frac(lo);
            hi += f - lo;
            lo = f;
        }
        out.push_back({lo, hi, false});
    }
    return out;
}

}  // namespace detail

// Least common refinement; each element is one connected piece of an
// intersection u_i ∩ v_j, written back as a ball.
inline Cover join(const Cover& u, const Cover& v) {
    if (u.space != v.space) throw ArgumentError("join of covers on different spaces");
    Cover out;
    out.space = u.space;
    out.id = "(" + u.id + ")v(" + v.id + ")";
    for (const auto& bu : u.balls) {
        Arc au = to_arc(u.space, bu);
        for (const auto& bv : v.balls) {
            for (const auto& piece : detail::intersect(u.space, au, to_arc(v.space, bv))) {
                Ball b = to_ball(u.space, piece);
                bool dup = false;
                for (const auto& e : out.balls)
                    if (e.center == b.center && e.radius == b.radius) {
                        dup = true;
                        break;
                    }
                if (!dup) out.balls.push_back(b);
            }
        }
    }
    return out;
}

// Does the part of `inner` inside the space lie in `outer`?
inline bool ball_within(Space sp, const Ball& inner, const Ball& outer) {
    Arc o = to_arc(sp, outer);
    Arc i = to_arc(sp, inner);
    if (o.full) return true;
    if (i.full) return false;
    if (sp == Space::circle) {
        for (int t = -1; t <= 1; ++t)
            if (o.lo + t <= i.lo && i.hi <= o.hi + t) return true;
        return false;
    }
    bool left = i.lo >= 0 ? o.lo <= i.lo : o.lo < 0;
    bool right = i.hi <= 1 ? i.hi <= o.hi : o.hi > 1;
    return left && right;
}

// Symbol map fine -> coarse (lowest containing index), if every fine ball
// lies in some coarse ball.
inline std::optional<std::vector<std::uint32_t>> refine_map(const Cover& fine, const Cover& coarse) {
    if (fine.space != coarse.space) return std::nullopt;
    std::vector<std::uint32_t> m;
    m.reserve(fine.size());
    for (const auto& f : fine.balls) {
        bool found = false;
        for (std::size_t j = 0; j < coarse.size(); ++j)
            if (ball_within(fine.space, f, coarse.balls[j])) {
                m.push_back(static_cast<std::uint32_t>(j));
                found = true;
                break;
            }
        if (!found) return std::nullopt;
    }
    return m;
}

}  // namespace orbitgauge
