#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cover.hpp"
#include "symbolic.hpp"
#include "systems.hpp"

namespace orbitgauge {

// g_1 = f(m) + 1, g_i = f(g_{i-1} + 1); entry i-1 holds g_i.
inline std::vector<long> g_schedule(const ModulusCertificate& f, long k, long m, long cap = max_precision_bits()) {
    if (k < 1) throw ArgumentError("schedule needs k >= 1");
    if (m < 0) throw ArgumentError("target accuracy must be nonnegative");
    std::vector<long> g;
    g.reserve(static_cast<std::size_t>(k));
    g.push_back(f(m) + 1);
    for (long i = 1; i < k; ++i) g.push_back(f(g.back() + 1));
    if (g.back() > cap)
        throw PrecisionExhausted("schedule for k=" + std::to_string(k) + ", m=" + std::to_string(m) + " needs " +
                                 std::to_string(g.back()) + " bits, cap is " + std::to_string(cap));
    return g;
}

struct TrackedPoint {
    Dyadic center;
    long radius_exp = 0;  // |T^i(x0) - center| < 2^-radius_exp (or exact when exact)
    bool exact = false;
};

struct TrackedOrbit {
    std::vector<TrackedPoint> steps;  // steps[i] encloses T^i(x0), i = 0..k
    long target = 0;
    long achieved = 0;
};

// Chained approximation: step i evaluates T at the previous ideal point to
// precision g_{k-i+1}(m') + 1 with m' = m + 1, so the final point is within
// 2^-m of T^k(x0).
inline TrackedOrbit track(const SystemSpec& sys, const Rational& x0, long k, long m) {
    check_in_space(sys, x0);
    if (k < 0) throw ArgumentError("negative step count");
    TrackedOrbit out;
    out.target = m;
    out.achieved = m;
    const long cap = max_precision_bits();
    Dyadic xd;
    bool dyadic_start = as_dyadic(x0, xd);
    if (dyadic_start && sys.exact_capable() && sys.kind != MapKind::logistic) {
        Dyadic x = xd;
        out.steps.push_back({x, 0, true});
        for (long i = 1; i <= k; ++i) {
            x = step_exact(sys, x);
            out.steps.push_back({x, 0, true});
        }
        out.achieved = std::numeric_limits<long>::max();
        return out;
    }
    if (k == 0) {
        if (dyadic_start) {
            out.steps.push_back({xd, 0, true});
        } else {
            out.steps.push_back({ceil_to(x0, m + 1), m, false});
        }
        return out;
    }
    ModulusCertificate f = modulus(sys);
    std::vector<long> g = g_schedule(f, k, m + 1, cap);
    auto G = [&](long j) { return j == 0 ? m + 1 : g[static_cast<std::size_t>(j - 1)]; };
    Dyadic s;
    if (dyadic_start) {
        s = xd;
        out.steps.push_back({s, 0, true});
    } else {
        s = floor_to(x0, G(k) + 1);
        if (sys.space == Space::circle && s == Dyadic(1)) s = Dyadic(0);
        out.steps.push_back({s, G(k), false});
    }
    for (long i = 1; i <= k; ++i) {
        long prec = G(k - i + 1) + 1;
        try {
            s = eval_map(sys, s, prec);
        } catch (const PrecisionExhausted& e) {
            throw PrecisionExhausted("track: step " + std::to_string(i) + " needs " + std::to_string(prec) +
                                     " bits: " + e.what());
        }
        if (sys.space == Space::interval) {
            if (s.sign() < 0) s = Dyadic(0);
            if (s > Dyadic(1)) s = Dyadic(1);
        }
        out.steps.push_back({s, i == k ? m : G(k - i), false});
    }
    return out;
}

// Symbolic orbit certified through the half-radius argument: the enclosure
// is kept below half the common radius and a ball whose half-size copy holds
// it is chosen.
inline SymbolicString track_symbolic(const SystemSpec& sys, const Rational& x0, const Cover& cover, long k,
                                     OrbitOptions opt = {}) {
    if (cover.balls.empty()) throw InvalidCover("empty cover");
    const Rational rho = cover.balls.front().radius;
    for (const auto& b : cover.balls)
        if (b.radius != rho) throw InvalidCover("track_symbolic needs a cover with one common radius");
    if (!is_nice(cover)) throw InvalidCover("track_symbolic needs a nice cover");
    CoverIndex idx(cover);
    const double half = Rational(rho / 2).get_d();
    SymbolicString out;
    out.alphabet = idx.alphabet();
    out.cover_id = cover.id;
    out.policy = "nice";
    std::vector<std::uint32_t> syms;
    walk_orbit(
        sys, x0, k,
        [&](long i, const EnclosureView& v) {
            if (i == 0) syms.clear();
            if (!(v.hi_up - v.lo_dn < half)) return false;
            long c = idx.nice(v);
            if (c < 0) return false;
            syms.push_back(static_cast<std::uint32_t>(c));
            return true;
        },
        opt);
    out.symbols = std::move(syms);
    return out;
}

struct RotationEstimate {
    Rational q;
    Rational width;          // length of the feasible set's component holding q
    Rational lo, hi;         // that component
    std::size_t components = 0;
    long steps = 0;          // constraints used: times 1..steps
};

// Rotation numbers q in [0,1) for which rotation by q from the same start
// reproduces the coding: i q + x0 in B(c_{w_i}, radius) mod 1 for every i.
inline RotationEstimate reconstruct_rotation(const SymbolicString& sym, const Cover& cover, const Rational& x0 = 0) {
    if (cover.space != Space::circle) throw ArgumentError("rotation reconstruction lives on the circle");
    if (sym.size() < 2) throw ArgumentError("need at least two symbols");
    for (auto s : sym.symbols)
        if (s >= cover.size()) throw ArgumentError("symbol outside the cover");
    // feasible set as disjoint open intervals inside (0,1) lifted: start with [0,1)
    struct Iv {
        Rational lo, hi;
    };
    std::vector<Iv> feas{{Rational(0), Rational(1)}};
    const long k = static_cast<long>(sym.size()) - 1;
    // also check time 0
    if (!ball_contains(Space::circle, cover.balls[sym.symbols[0]], x0))
        throw InconsistentInput("the start point is not in the first coded ball");
    for (long i = 1; i <= k && !feas.empty(); ++i) {
        const Ball& b = cover.balls[sym.symbols[static_cast<std::size_t>(i)]];
        if (b.radius > Rational(1, 2)) continue;
        // i q in (c - r - x0, c + r - x0) + Z  <=>  q in ((c - r - x0 + j)/i, (c + r - x0 + j)/i)
        std::vector<Iv> next;
        Rational lo0 = b.center - b.radius - x0;
        for (const auto& f : feas) {
            // j ranges so that the window meets [f.lo, f.hi]
            Rational a = f.lo * i - lo0 - 2 * b.radius;
            mpz_class jmin;
            mpz_fdiv_q(jmin.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
            for (mpz_class j = jmin;; ++j) {
                Rational wl = (lo0 + Rational(j)) / i;
                Rational wh = (lo0 + 2 * b.radius + Rational(j)) / i;
                if (wl >= f.hi) break;
                Rational l = std::max(wl, f.lo), h = std::min(wh, f.hi);
                l.canonicalize();
                h.canonicalize();
                if (l < h) next.push_back({l, h});
            }
        }
        feas = std::move(next);
    }
    if (feas.empty()) throw InconsistentInput("no rotation number reproduces the coding");
    RotationEstimate r;
    r.components = feas.size();
    r.steps = k;
    // widest component, lowest first on ties
    std::size_t w = 0;
    for (std::size_t i = 1; i < feas.size(); ++i)
        if (feas[i].hi - feas[i].lo > feas[w].hi - feas[w].lo) w = i;
    r.lo = feas[w].lo;
    r.hi = feas[w].hi;
    r.width = r.hi - r.lo;
    r.q = (r.lo + r.hi) / 2;
    r.q.canonicalize();
    return r;
}

// Leading binary digits shared: floor(-log2 |r - q|).
inline long recovered_digits(const Rational& r, const Rational& q) {
    Rational d = abs(r - q);
    if (d == 0) return 1L << 20;
    // floor(log2(den/num))
    long e = static_cast<long>(mpz_sizeinbase(d.get_den_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(d.get_num_mpz_t(), 2));
    for (;;) {
        Rational p = Dyadic::pow2(-(e + 1)).to_rational();
        Rational pe = Dyadic::pow2(-e).to_rational();
        if (d <= pe && !(d <= p)) return e;
        if (d <= p)
            ++e;
        else
            --e;
    }
}

}  // namespace orbitgauge
