#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "complexity.hpp"
#include "cover.hpp"
#include "orbit.hpp"
#include "systems.hpp"

namespace orbitgauge {

struct SeparationReport {
    long n = 0;
    Rational epsilon;
    long separated_count = 0;  // certified lower bound on s(n, eps) over the grid
    long net_count = 0;        // upper-bound witness for r(n, eps) over the grid
    std::optional<long> join_count;
    long grid_bits = 0;        // grid resolution 2^-grid_bits
    long ambiguous = 0;        // pairs or points left undecided, handled conservatively
    std::vector<Dyadic> separated_points;
    std::vector<Dyadic> net_points;
};

namespace detail {

// Orbit enclosures of one grid point in double interval arithmetic.
struct GridOrbit {
    std::vector<double> lo, hi;
    bool precise = true;
};

inline void double_orbit(const SystemSpec& s, MannevilleTable* tab, double x, long n, double max_width,
                         GridOrbit& out) {
    DoubleArith ar;
    out.lo.resize(static_cast<std::size_t>(n));
    out.hi.resize(static_cast<std::size_t>(n));
    out.precise = true;
    DoubleInterval v{x, x};
    for (long k = 0; k < n; ++k) {
        if (k > 0) v = image(ar, s, v, tab);
        out.lo[static_cast<std::size_t>(k)] = v.lo;
        out.hi[static_cast<std::size_t>(k)] = v.hi;
        if (!(v.hi - v.lo <= max_width)) out.precise = false;
    }
}

// Certified bounds on d(x, y) for enclosures [xl,xh], [yl,yh].
inline void distance_bounds(Space sp, double xl, double xh, double yl, double yh, double& dlo, double& dhi) {
    double a = add_down(xl, -yh), b = add_up(xh, -yl);  // x - y in [a, b]
    if (sp == Space::interval) {
        if (a <= 0 && b >= 0) {
            dlo = 0;
        } else {
            dlo = a > 0 ? a : -b;
        }
        dhi = std::max(std::fabs(a), std::fabs(b));
        return;
    }
    if (b - a >= 0.5) {
        dlo = 0;
        dhi = 0.5;
        return;
    }
    double sh = std::nearbyint((a + b) / 2);
    a = add_down(a, -sh);
    b = add_up(b, -sh);
    // circle distance of t in (-3/4, 3/4): |t| or 1 - |t|
    auto g_dn = [](double t) {
        double u = std::fabs(t);
        return u <= 0.5 ? u : add_down(1.0, -u);
    };
    auto g_up = [](double t) {
        double u = std::fabs(t);
        return u <= 0.5 ? u : add_up(1.0, -u);
    };
    dlo = (a <= 0 && b >= 0) ? 0.0 : std::min(g_dn(a), g_dn(b));
    dhi = (a <= -0.5 || b >= 0.5) ? 0.5 : std::max(g_up(a), g_up(b));
}

enum class PairState { near, separated, ambiguous };

inline PairState compare_orbits(Space sp, const GridOrbit& x, const double* ylo, const double* yhi, long n,
                                double eps_dn, double eps_up) {
    bool all_near = true;
    for (long k = 0; k < n; ++k) {
        double dlo, dhi;
        distance_bounds(sp, x.lo[static_cast<std::size_t>(k)], x.hi[static_cast<std::size_t>(k)],
                        ylo[k], yhi[k], dlo, dhi);
        if (dlo > eps_up) return PairState::separated;
        if (!(dhi <= eps_dn)) all_near = false;
    }
    return all_near ? PairState::near : PairState::ambiguous;
}

// Kept orbits indexed by a trie over per-step bucket indices. Buckets have
// width >= 2 eps, so orbits two buckets apart at some step are separated.
class OrbitStore {
public:
    OrbitStore(Space sp, long n, long buckets) : sp_(sp), n_(n), B_(std::max<long>(buckets, 1)) {
        nodes_.push_back(Node{});
    }

    std::size_t size() const { return count_; }
    const double* lo(std::size_t id) const { return &lo_[id * static_cast<std::size_t>(n_)]; }
    const double* hi(std::size_t id) const { return &hi_[id * static_cast<std::size_t>(n_)]; }

    void insert(const GridOrbit& o) {
        auto id = static_cast<std::uint32_t>(count_++);
        lo_.insert(lo_.end(), o.lo.begin(), o.lo.end());
        hi_.insert(hi_.end(), o.hi.begin(), o.hi.end());
        std::vector<long> b = bucket_path(o);
        std::uint32_t cur = 0;
        long depth = 0;
        for (;;) {
            Node& nd = nodes_[cur];
            if (nd.leaf) {
                nd.ids.push_back(id);
                if (nd.ids.size() > kLeaf && depth < n_) burst(cur, depth);
                return;
            }
            std::int32_t child = nodes_[cur].kids[static_cast<std::size_t>(b[static_cast<std::size_t>(depth)])];
            if (child < 0) {
                child = static_cast<std::int32_t>(nodes_.size());
                nodes_.push_back(Node{});
                nodes_[cur].kids[static_cast<std::size_t>(b[static_cast<std::size_t>(depth)])] = child;
            }
            cur = static_cast<std::uint32_t>(child);
            ++depth;
        }
    }

    // Ids that may be within eps of o at every step.
    void candidates(const GridOrbit& o, std::vector<std::uint32_t>& out) const {
        out.clear();
        std::vector<long> b = bucket_path(o);
        walk(0, 0, b, out);
    }

private:
    static constexpr std::size_t kLeaf = 32;
    struct Node {
        bool leaf = true;
        std::vector<std::uint32_t> ids;
        std::vector<std::int32_t> kids;
    };

    long bucket(double lo, double hi) const {
        double m = (lo + hi) / 2;
        if (sp_ == Space::circle) m -= std::floor(m);
        auto k = static_cast<long>(std::floor(m * static_cast<double>(B_)));
        return std::clamp<long>(k, 0, B_ - 1);
    }
    std::vector<long> bucket_path(const GridOrbit& o) const {
        std::vector<long> b(static_cast<std::size_t>(n_));
        for (long k = 0; k < n_; ++k) b[static_cast<std::size_t>(k)] = bucket(o.lo[static_cast<std::size_t>(k)], o.hi[static_cast<std::size_t>(k)]);
        return b;
    }
    std::vector<long> stored_path(std::uint32_t id) const {
        std::vector<long> b(static_cast<std::size_t>(n_));
        for (long k = 0; k < n_; ++k) b[static_cast<std::size_t>(k)] = bucket(lo(id)[k], hi(id)[k]);
        return b;
    }

    void burst(std::uint32_t node, long depth) {
        std::vector<std::uint32_t> ids = std::move(nodes_[node].ids);
        nodes_[node].ids.clear();
        nodes_[node].leaf = false;
        nodes_[node].kids.assign(static_cast<std::size_t>(B_), -1);
        for (auto id : ids) {
            long bk = bucket(lo(id)[depth], hi(id)[depth]);
            std::int32_t child = nodes_[node].kids[static_cast<std::size_t>(bk)];
            if (child < 0) {
                child = static_cast<std::int32_t>(nodes_.size());
                nodes_.push_back(Node{});
                nodes_[node].kids[static_cast<std::size_t>(bk)] = child;
            }
            nodes_[static_cast<std::size_t>(child)].ids.push_back(id);
        }
        for (auto c : nodes_[node].kids)
            if (c >= 0 && nodes_[static_cast<std::size_t>(c)].ids.size() > kLeaf && depth + 1 < n_)
                burst(static_cast<std::uint32_t>(c), depth + 1);
    }

    void walk(std::uint32_t node, long depth, const std::vector<long>& b, std::vector<std::uint32_t>& out) const {
        const Node& nd = nodes_[node];
        if (nd.leaf) {
            out.insert(out.end(), nd.ids.begin(), nd.ids.end());
            return;
        }
        long c = b[static_cast<std::size_t>(depth)];
        for (long d = -1; d <= 1; ++d) {
            long k = c + d;
            if (sp_ == Space::circle) {
                k = (k + B_) % B_;
                if (B_ <= 2 && d != 0 && k == c) continue;
                if (B_ == 3 && d == 1 && k == (c + B_ - 1) % B_) continue;
            } else if (k < 0 || k >= B_) {
                continue;
            }
            std::int32_t child = nd.kids[static_cast<std::size_t>(k)];
            if (child >= 0) walk(static_cast<std::uint32_t>(child), depth + 1, b, out);
        }
    }

    Space sp_;
    long n_;
    long B_;
    std::vector<Node> nodes_;
    std::vector<double> lo_, hi_;
    std::size_t count_ = 0;
};

inline long grid_points(Space sp, long grid_bits) {
    long G = 1L << grid_bits;
    return sp == Space::circle ? G : G + 1;
}

struct GreedyResult {
    long count = 0;
    long ambiguous = 0;
    std::vector<Dyadic> points;
};

// Greedy scan over the grid in ascending order. separated=true keeps points
// certified separated from all kept ones; otherwise keeps points not
// certified within eps of a kept one.
inline GreedyResult greedy_scan(const SystemSpec& s, long n, const Rational& eps, long grid_bits, bool separated,
                                bool keep_points) {
    if (n < 1) throw ArgumentError("n must be at least 1");
    if (grid_bits < 1 || grid_bits > 26) throw ArgumentError("grid resolution out of range");
    if (Dyadic::pow2(-grid_bits).to_rational() > eps / 4) throw ArgumentError("grid resolution must be at most eps/4");
    const double eps_dn = orbitgauge::floor_to(eps, 80).to_double_down();
    const double eps_up = orbitgauge::ceil_to(eps, 80).to_double_up();
    const long B = std::max<long>(1, static_cast<long>(std::floor(1.0 / (2.0 * eps_up))));
    MannevilleTable tab(s);
    OrbitStore store(s.space, n, B);
    std::vector<GridOrbit> loose;  // imprecise net points, checked linearly
    GridOrbit o;
    std::vector<std::uint32_t> cand;
    GreedyResult r;
    const long G = grid_points(s.space, grid_bits);
    const double h = std::ldexp(1.0, static_cast<int>(-grid_bits));
    for (long j = 0; j < G; ++j) {
        double x = static_cast<double>(j) * h;
        double_orbit(s, &tab, x, n, eps_dn / 2, o);
        bool covered = false, unsure = false;
        if (o.precise) {
            store.candidates(o, cand);
            for (auto id : cand) {
                PairState st = compare_orbits(s.space, o, store.lo(id), store.hi(id), n, eps_dn, eps_up);
                if (st == PairState::near) {
                    covered = true;
                    break;
                }
                if (st == PairState::ambiguous) unsure = true;
            }
        } else {
            unsure = true;
        }
        if (!covered) {
            for (const auto& l : loose) {
                PairState st = compare_orbits(s.space, o, l.lo.data(), l.hi.data(), n, eps_dn, eps_up);
                if (st == PairState::near) {
                    covered = true;
                    break;
                }
                if (st == PairState::ambiguous) unsure = true;
            }
        }
        if (covered) continue;
        if (separated) {
            if (unsure) {
                ++r.ambiguous;
                continue;
            }
        } else if (unsure) {
            ++r.ambiguous;
        }
        ++r.count;
        if (keep_points) r.points.push_back(Dyadic(j, -grid_bits));
        if (o.precise)
            store.insert(o);
        else
            loose.push_back(o);
    }
    return r;
}

}  // namespace detail

inline SeparationReport separated_set(const SystemSpec& s, long n, const Rational& eps, long grid_bits,
                                      bool keep_points = false) {
    auto g = detail::greedy_scan(s, n, eps, grid_bits, true, keep_points);
    SeparationReport r;
    r.n = n;
    r.epsilon = eps;
    r.grid_bits = grid_bits;
    r.separated_count = g.count;
    r.ambiguous = g.ambiguous;
    r.separated_points = std::move(g.points);
    return r;
}

inline SeparationReport net_set(const SystemSpec& s, long n, const Rational& eps, long grid_bits,
                                bool keep_points = false) {
    auto g = detail::greedy_scan(s, n, eps, grid_bits, false, keep_points);
    SeparationReport r;
    r.n = n;
    r.epsilon = eps;
    r.grid_bits = grid_bits;
    r.net_count = g.count;
    r.ambiguous = g.ambiguous;
    r.net_points = std::move(g.points);
    return r;
}

// Grid fine enough to resolve (n, eps) Bowen balls of a map with slope L.
inline long default_grid_bits(const SystemSpec& s, long n, const Rational& eps, long max_bits = 20) {
    double L = std::ldexp(1.0, static_cast<int>(modulus(s).offset));
    double e = eps.get_d();
    // 3 spare bits: about eight grid points across the smallest Bowen ball
    long need = static_cast<long>(std::ceil(std::log2(4.0 / e) + static_cast<double>(n - 1) * std::log2(L))) + 3;
    long min_bits = static_cast<long>(std::ceil(std::log2(4.0 / e)));
    return std::clamp(need, min_bits, std::max(max_bits, min_bits));
}

struct EntropyProfile {
    struct Row {
        Rational epsilon;
        long n = 0;
        long sep = 0;
        long net = 0;
        std::optional<long> join;
        long grid_bits = 0;
        long ambiguous = 0;
    };
    std::vector<Row> rows;
    std::vector<Rational> epsilons;
    std::vector<double> h_eps;  // per epsilon, in bits per unit of f
    double h = 0;               // value at the smallest epsilon
    std::string f_name;
};

struct EntropyOptions {
    long max_grid_bits = 20;
    bool nets = true;
};

inline EntropyProfile gen_entropy(const SystemSpec& s, const ScalingFunction& f, std::vector<Rational> eps_ladder,
                                  const std::vector<long>& n_ladder, EntropyOptions opt = {}) {
    if (eps_ladder.empty() || n_ladder.empty()) throw ArgumentError("empty ladder");
    std::sort(eps_ladder.begin(), eps_ladder.end(), [](const auto& a, const auto& b) { return a > b; });
    EntropyProfile p;
    p.epsilons = eps_ladder;
    p.f_name = f.name();
    for (const auto& eps : eps_ladder) {
        long nmax = *std::max_element(n_ladder.begin(), n_ladder.end());
        long gb = default_grid_bits(s, nmax, eps, opt.max_grid_bits);
        std::vector<double> logs;
        for (long n : n_ladder) {
            auto sr = separated_set(s, n, eps, gb);
            EntropyProfile::Row row;
            row.epsilon = eps;
            row.n = n;
            row.sep = sr.separated_count;
            row.grid_bits = gb;
            row.ambiguous = sr.ambiguous;
            if (opt.nets) {
                auto nr = net_set(s, n, eps, gb);
                row.net = nr.net_count;
                row.ambiguous += nr.ambiguous;
            }
            logs.push_back(std::log2(static_cast<double>(std::max<long>(row.sep, 1))));
            p.rows.push_back(row);
        }
        p.h_eps.push_back(n_ladder.size() >= 4 ? growth_rate(n_ladder, logs, f) : 0.0);
    }
    p.h = p.h_eps.back();
    return p;
}

// ---------------------------------------------------------------------------
// Cover joins pulled back through branch inverses.

namespace detail {

inline Arc normalize_arc(Space sp, Rational lo, Rational hi) {
    if (sp == Space::circle) {
        if (hi - lo > 1) return {0, 1, true};
        Rational f = frac(lo);
        hi += f - lo;
        lo = f;
    }
    lo.canonicalize();
    hi.canonicalize();
    return {lo, hi, false};
}

inline Rational round_rational(const Rational& q, long bits) { return orbitgauge::floor_to(q, bits).to_rational(); }

// Laminar inverse of the Manneville lift on [0,1), approximated at 2^-bits.
inline Rational manneville_inverse(const SystemSpec& s, MannevilleTable& tab, const Rational& y, long bits) {
    Rational a = s.a.to_rational();
    if (y <= 0) return 0;
    DyadicArith ar{bits + 16};
    Dyadic yd = orbitgauge::floor_to(y, bits + 16);
    mpz_class k;
    if (yd >= s.a)
        k = 1;
    else
        k = manneville_branch(s, yd) + 1;
    DyadicInterval xk = tab.xi(k, bits + 16), xk1 = tab.xi(k - 1, bits + 16), xk2 = tab.xi(k - 2, bits + 16);
    DyadicInterval Y{yd, yd};
    DyadicInterval v = ar.add(xk, ar.mul(ar.sub(Y, xk1), ar.div(ar.sub(xk1, xk), ar.sub(xk2, xk1))));
    return (v.lo + v.hi).shifted(-1).nearest_to(bits).to_rational();
}

// Left inverse branch of a unimodal map on [0, critical value].
inline Rational unimodal_left_inverse(const SystemSpec& s, const Rational& y, long bits) {
    if (s.kind == MapKind::tent) return y / 2;
    // (1 - sqrt(1 - 4y/lambda)) / 2
    Rational t = 1 - 4 * y / s.lambda.to_rational();
    if (t < 0) t = 0;
    mpz_class scaled, root;
    Rational ts = t * Dyadic::pow2(2 * bits).to_rational();
    mpz_fdiv_q(scaled.get_mpz_t(), ts.get_num_mpz_t(), ts.get_den_mpz_t());
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    Rational sq = Dyadic(root, -bits).to_rational();
    Rational r = (1 - sq) / 2;
    r.canonicalize();
    return r;
}

inline std::vector<Arc> preimage(const SystemSpec& s, MannevilleTable& tab, const Arc& a, long bits) {
    std::vector<Arc> out;
    if (a.full) return {a};
    switch (s.kind) {
        case MapKind::rotation: {
            Rational r = s.r.to_rational();
            out.push_back(normalize_arc(s.space, a.lo - r, a.hi - r));
            break;
        }
        case MapKind::doubling:
            out.push_back(normalize_arc(s.space, a.lo / 2, a.hi / 2));
            out.push_back(normalize_arc(s.space, (a.lo + 1) / 2, (a.hi + 1) / 2));
            break;
        case MapKind::manneville_pw: {
            // inverse lift: F^-1(y + 2q) = F^-1(y) + q
            auto inv = [&](const Rational& y) {
                mpz_class q;
                Rational half = y / 2;
                mpz_fdiv_q(q.get_mpz_t(), half.get_num_mpz_t(), half.get_den_mpz_t());
                Rational r = y - 2 * Rational(q);
                Rational base = r >= 1 ? Rational(s.a.to_rational() + (1 - s.a.to_rational()) * (r - 1))
                                       : manneville_inverse(s, tab, r, bits);
                return Rational(base + q);
            };
            out.push_back(normalize_arc(s.space, inv(a.lo), inv(a.hi)));
            out.push_back(normalize_arc(s.space, inv(a.lo + 1), inv(a.hi + 1)));
            break;
        }
        case MapKind::tent:
        case MapKind::logistic: {
            Rational cv = s.kind == MapKind::tent ? Rational(1) : Rational(s.lambda.to_rational() / 4);
            if (a.lo >= cv) break;
            if (a.hi > cv) {
                if (a.lo < 0) {
                    out.push_back({Rational(-1), Rational(2), false});
                } else {
                    Rational l = unimodal_left_inverse(s, a.lo, bits);
                    out.push_back({l, 1 - l, false});
                }
                break;
            }
            Rational gl = a.lo < 0 ? Rational(-1) : unimodal_left_inverse(s, a.lo, bits);
            Rational gh = unimodal_left_inverse(s, a.hi, bits);
            out.push_back({gl, gh, false});
            out.push_back({1 - gh, a.lo < 0 ? Rational(2) : Rational(1 - gl), false});
            break;
        }
    }
    return out;
}

// Drop duplicates and pieces inside another piece; neither changes the
// minimum subcover size.
inline void prune(std::vector<Arc>& v) {
    for (const auto& a : v)
        if (a.full) {
            v = {a};
            return;
        }
    std::sort(v.begin(), v.end(), [](const Arc& a, const Arc& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi > b.hi;
    });
    std::vector<Arc> out;
    bool have = false;
    Rational reach;
    for (auto& a : v) {
        if (have && a.hi <= reach) continue;
        out.push_back(a);
        reach = a.hi;
        have = true;
    }
    v = std::move(out);
}

inline long count_arcs(Space sp, const std::vector<Arc>& arcs) {
    Cover c;
    c.space = sp;
    c.id = "join";
    for (const auto& a : arcs) c.balls.push_back(to_ball(sp, a));
    return min_subcover_count(c);
}

}  // namespace detail

struct JoinOptions {
    std::size_t max_pieces = 1u << 20;
    long inverse_bits = 200;
};

// N(U v T^-1 U v ... v T^-n U), counting connected pieces of the join.
inline long cover_join_count(const SystemSpec& s, const Cover& u, long n, JoinOptions opt = {}) {
    if (u.space != s.space) throw ArgumentError("cover and system live on different spaces");
    if (n < 0) throw ArgumentError("negative join depth");
    MannevilleTable tab(s);
    std::vector<Arc> base;
    for (const auto& b : u.balls) base.push_back(to_arc(u.space, b));
    std::vector<Arc> cur = base;
    detail::prune(cur);
    for (long m = 1; m <= n; ++m) {
        std::vector<Arc> pulled;
        for (const auto& a : cur)
            for (auto& p : detail::preimage(s, tab, a, opt.inverse_bits)) pulled.push_back(p);
        std::vector<Arc> next;
        for (const auto& b : base)
            for (const auto& p : pulled) {
                for (auto& piece : detail::intersect(u.space, b, p)) next.push_back(piece);
                if (next.size() > 4 * opt.max_pieces) throw SizeError("join exceeds the piece cap");
            }
        detail::prune(next);
        if (next.size() > opt.max_pieces) throw SizeError("join exceeds the piece cap");
        cur = std::move(next);
    }
    return detail::count_arcs(u.space, cur);
}

// ---------------------------------------------------------------------------

struct SandwichFinding {
    std::string check;
    long n = 0;
    Rational epsilon;
    long lhs = 0;
    long rhs = 0;
    bool ok = true;
};

struct SandwichReport {
    std::vector<SandwichFinding> findings;
    long violations = 0;
};

namespace detail {

// Exact orbits of grid points for the brute-force comparisons.
inline std::vector<std::vector<Rational>> exact_orbits(const SystemSpec& s, const std::vector<Rational>& pts, long n) {
    std::vector<std::vector<Rational>> o;
    for (const auto& p : pts) {
        std::vector<Rational> v{p};
        for (long k = 1; k < n; ++k) v.push_back(step_exact(s, v.back()));
        o.push_back(std::move(v));
    }
    return o;
}

}  // namespace detail

// Exhaustive r_G(eps) <= s_G(eps) <= r_G(eps/2) on a small grid.
inline SandwichFinding brute_sandwich(const SystemSpec& s, long n, const Rational& eps, long grid_bits) {
    if (!s.exact_capable()) throw ArgumentError("brute-force sandwich needs an exact map");
    std::vector<Rational> pts;
    long G = detail::grid_points(s.space, grid_bits);
    if (G > 20) throw SizeError("brute-force grid limited to 20 points");
    for (long j = 0; j < G; ++j) pts.push_back(Rational(j, 1L << grid_bits));
    auto orb = detail::exact_orbits(s, pts, n);
    const std::size_t m = pts.size();
    // largest distance along the orbit pair, per pair
    std::vector<Rational> dmax(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (long k = 0; k < n; ++k)
                dmax[i * m + j] = std::max(dmax[i * m + j], distance(s.space, orb[i][static_cast<std::size_t>(k)],
                                                                     orb[j][static_cast<std::size_t>(k)]));
    std::vector<char> far_m(m * m);
    auto far = [&](std::size_t i, std::size_t j, const Rational&) { return far_m[i * m + j] != 0; };
    auto set_eps = [&](const Rational& e) {
        for (std::size_t i = 0; i < m * m; ++i) far_m[i] = dmax[i] > e;
    };
    auto s_of = [&](const Rational& e) {
        set_eps(e);
        long best = 0;
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
            long pc = __builtin_popcount(mask);
            if (pc <= best) continue;
            bool ok = true;
            for (std::size_t i = 0; i < m && ok; ++i)
                if (mask & (1u << i))
                    for (std::size_t j = i + 1; j < m && ok; ++j)
                        if ((mask & (1u << j)) && !far(i, j, e)) ok = false;
            if (ok) best = pc;
        }
        return best;
    };
    auto r_of = [&](const Rational& e) {
        set_eps(e);
        long best = static_cast<long>(m);
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
            long pc = __builtin_popcount(mask);
            if (pc >= best) continue;
            bool ok = true;
            for (std::size_t y = 0; y < m && ok; ++y) {
                bool hit = false;
                for (std::size_t i = 0; i < m && !hit; ++i)
                    if ((mask & (1u << i)) && !far(i, y, e)) hit = true;
                ok = hit;
            }
            if (ok) best = pc;
        }
        return best;
    };
    long sv = s_of(eps), rv = r_of(eps), rh = r_of(eps / 2);
    SandwichFinding f;
    f.check = "r(eps)<=s(eps)<=r(eps/2)";
    f.n = n;
    f.epsilon = eps;
    f.lhs = sv;
    f.rhs = rh;
    f.ok = rv <= sv && sv <= rh;
    return f;
}

struct SandwichOptions {
    long brute_grid_bits = 4;
    long max_grid_bits = 16;
};

// Bowen balls of rotations and of the doubling map are arcs, which is what
// makes the join count at most the net count; other maps get the lower bound
// and the brute-force part only.
inline bool bowen_balls_connected(const SystemSpec& s) {
    return s.kind == MapKind::rotation || s.kind == MapKind::doubling;
}

inline SandwichReport sandwich_check(const SystemSpec& s, const std::vector<Cover>& covers, long n_max,
                                     const std::vector<Rational>& eps_values, SandwichOptions opt = {}) {
    SandwichReport rep;
    auto add = [&](SandwichFinding f) {
        if (!f.ok) ++rep.violations;
        rep.findings.push_back(std::move(f));
    };
    for (long n = 1; n <= n_max; ++n)
        for (const auto& e : eps_values) add(brute_sandwich(s, n, e, opt.brute_grid_bits));
    for (const auto& u : covers) {
        Rational diam = max_diameter(u);
        Rational delta = lebesgue_number(u);
        for (long n = 1; n <= n_max; ++n) {
            long J = cover_join_count(s, u, n - 1);
            // lower bound: eps just above diam(U)
            Rational eps = diam + Rational(1, 1024);
            long gb = std::min(opt.max_grid_bits, default_grid_bits(s, n, eps, opt.max_grid_bits));
            auto sr = separated_set(s, n, eps, gb);
            SandwichFinding lo;
            lo.check = "join>=s(eps>diam) [" + u.id + "]";
            lo.n = n;
            lo.epsilon = eps;
            lo.lhs = J;
            lo.rhs = sr.separated_count;
            lo.ok = J >= sr.separated_count;
            add(lo);
            if (!bowen_balls_connected(s)) continue;
            // upper bound: net at eps' with eps' + L^(n-1) h / 2 < delta
            Rational ep = delta / 2;
            double L = std::ldexp(1.0, static_cast<int>(modulus(s).offset));
            double slack = Rational(delta - ep).get_d() * 0.5;
            long need = static_cast<long>(std::ceil(std::log2(std::pow(L, static_cast<double>(n - 1)) / slack)));
            long gb2 = std::max(need, static_cast<long>(std::ceil(std::log2(4.0 / ep.get_d()))));
            if (gb2 > 22) throw SizeError("upper-bound grid too fine");
            auto nr = net_set(s, n, ep, gb2);
            SandwichFinding hi;
            hi.check = "join<=r(lebesgue) [" + u.id + "]";
            hi.n = n;
            hi.epsilon = ep;
            hi.lhs = J;
            hi.rhs = nr.net_count;
            hi.ok = J <= nr.net_count;
            add(hi);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct EquicontinuityWitness {
    bool found = false;
    Dyadic x, y;
    long k = 0;
    Rational eta;
    double distance_lower = 0;
};

// Search pairs (x, x + eta/2) on a grid of step eta/2 for certified
// separation beyond eps within n_max steps.
inline EquicontinuityWitness equicontinuity_probe(const SystemSpec& s, const Rational& eps,
                                                  const std::vector<Rational>& eta_ladder, long n_max,
                                                  long max_pairs = 1L << 14) {
    EquicontinuityWitness w;
    MannevilleTable tab(s);
    const double eps_up = orbitgauge::ceil_to(eps, 80).to_double_up();
    detail::GridOrbit a, b;
    for (const auto& eta : eta_ladder) {
        Dyadic step = orbitgauge::floor_to(eta / 2, 60);
        if (step.is_zero()) continue;
        long count = 0;
        long stride = 1;
        double st = step.to_double();
        long pts = static_cast<long>(std::floor(1.0 / st));
        if (pts > max_pairs) stride = (pts + max_pairs - 1) / max_pairs;
        for (long j = 0; j < pts && count < max_pairs; j += stride, ++count) {
            Dyadic x = step * Dyadic(j);
            Dyadic y = x + step;
            if (s.space == Space::interval && y > Dyadic(1)) break;
            if (s.space == Space::circle && y >= Dyadic(1)) break;
            detail::double_orbit(s, &tab, x.to_double(), n_max, 1.0, a);
            detail::double_orbit(s, &tab, y.to_double(), n_max, 1.0, b);
            for (long k = 0; k < n_max; ++k) {
                double dlo, dhi;
                detail::distance_bounds(s.space, a.lo[static_cast<std::size_t>(k)], a.hi[static_cast<std::size_t>(k)],
                                        b.lo[static_cast<std::size_t>(k)], b.hi[static_cast<std::size_t>(k)], dlo, dhi);
                if (dlo > eps_up) {
                    w.found = true;
                    w.x = x;
                    w.y = y;
                    w.k = k;
                    w.eta = eta;
                    w.distance_lower = dlo;
                    return w;
                }
            }
        }
    }
    return w;
}

}  // namespace orbitgauge
