#pragma once

#include <cmath>
#include <string>

#include "interval.hpp"
#include "systems.hpp"

namespace orbitgauge {

// What a consumer sees of one orbit point: outward double bounds, plus
// exact endpoints (or an exact rational point) for tie-breaking.
struct EnclosureView {
    double lo_dn = 0;
    double hi_up = 0;
    const Dyadic* lo = nullptr;
    const Dyadic* hi = nullptr;
    const Rational* q = nullptr;
};

enum class OrbitMode { exact_dyadic, exact_rational, float64, dyadic };

struct OrbitOptions {
    long max_prec = max_precision_bits();
    long first_prec = 128;
    bool allow_exact = true;
    bool allow_float = true;
};

namespace detail {

inline void rational_bounds(const Rational& q, double& lo, double& hi) {
    double d = q.get_d();  // truncated toward zero
    lo = std::nextafter(d, -INFINITY);
    hi = std::nextafter(d, INFINITY);
    if (q == 0) lo = hi = 0;
}

template <class Visitor>
bool run_exact_dyadic(const SystemSpec& s, Dyadic x, long n, Visitor& visit, long bit_cap) {
    for (long k = 0; k < n; ++k) {
        if (static_cast<long>(x.bit_size()) > bit_cap) return false;
        EnclosureView v;
        v.lo_dn = x.to_double_down();
        v.hi_up = x.to_double_up();
        v.lo = v.hi = &x;
        if (!visit(k, v)) throw PrecisionExhausted("exact orbit point could not be classified at step " + std::to_string(k));
        if (k + 1 < n) x = step_exact(s, x);
    }
    return true;
}

template <class Visitor>
void run_exact_rational(const SystemSpec& s, Rational x, long n, Visitor& visit) {
    for (long k = 0; k < n; ++k) {
        EnclosureView v;
        rational_bounds(x, v.lo_dn, v.hi_up);
        v.q = &x;
        if (!visit(k, v)) throw PrecisionExhausted("exact orbit point could not be classified at step " + std::to_string(k));
        if (k + 1 < n) x = step_exact(s, x);
    }
}

template <class Arith, class Visitor>
bool run_rounded(const SystemSpec& s, const Arith& ar, typename Arith::I x, long n, Visitor& visit,
                 MannevilleTable* tab) {
    for (long k = 0; k < n; ++k) {
        EnclosureView v;
        Dyadic lo, hi;
        if constexpr (std::is_same_v<Arith, DoubleArith>) {
            if (!(x.hi - x.lo < 0.25)) return false;
            v.lo_dn = x.lo;
            v.hi_up = x.hi;
            lo = Dyadic::from_double(x.lo);
            hi = Dyadic::from_double(x.hi);
        } else {
            if (!(x.hi - x.lo < Dyadic::pow2(-2))) return false;
            v.lo_dn = x.lo.to_double_down();
            v.hi_up = x.hi.to_double_up();
            lo = x.lo;
            hi = x.hi;
        }
        v.lo = &lo;
        v.hi = &hi;
        if (!visit(k, v)) return false;
        if (k + 1 < n) x = image(ar, s, x, tab);
    }
    return true;
}

}  // namespace detail

// Walk the first n points of the orbit of x0, handing each to visit(k, view).
// visit returns false when the enclosure is too coarse to decide; the walk
// then restarts from k = 0 at a higher precision. Returns the mode that
// finished. Throws PrecisionExhausted past the cap.
template <class Visitor>
OrbitMode walk_orbit(const SystemSpec& s, const Rational& x0, long n, Visitor&& visit, OrbitOptions opt = {}) {
    check_in_space(s, x0);
    Dyadic xd;
    bool dyadic_start = as_dyadic(x0, xd);
    if (opt.allow_exact && s.exact_capable()) {
        if (dyadic_start) {
            // logistic multiplies the bit size each step; give up on exactness past the cap
            long cap = s.kind == MapKind::logistic ? std::max<long>(opt.max_prec, static_cast<long>(xd.bit_size()) + 64)
                                                   : std::numeric_limits<long>::max();
            if (detail::run_exact_dyadic(s, xd, n, visit, cap)) return OrbitMode::exact_dyadic;
        } else if (s.kind != MapKind::logistic) {
            detail::run_exact_rational(s, x0, n, visit);
            return OrbitMode::exact_rational;
        }
    }
    MannevilleTable tab(s);
    if (opt.allow_float) {
        DoubleArith ar;
        if (detail::run_rounded(s, ar, ar.enclose(x0), n, visit, &tab)) return OrbitMode::float64;
    }
    for (long p = opt.first_prec;; p *= 2) {
        if (p > opt.max_prec) p = opt.max_prec;
        DyadicArith ar{p};
        if (detail::run_rounded(s, ar, ar.enclose(x0), n, visit, &tab)) return OrbitMode::dyadic;
        if (p >= opt.max_prec) break;
    }
    throw PrecisionExhausted("orbit of length " + std::to_string(n) + " needs more than " +
                             std::to_string(opt.max_prec) + " bits");
}

// Certified enclosures of T^k(x0), k < n, each of width below 2^-accuracy.
inline std::vector<DyadicInterval> enclosure_orbit(const SystemSpec& s, const Rational& x0, long n, long accuracy,
                                                   OrbitOptions opt = {}) {
    std::vector<DyadicInterval> out;
    Dyadic tol = Dyadic::pow2(-accuracy);
    walk_orbit(
        s, x0, n,
        [&](long k, const EnclosureView& v) {
            if (k == 0) out.clear();
            if (v.q) {
                out.push_back({floor_to(*v.q, accuracy + 2), ceil_to(*v.q, accuracy + 2)});
                return true;
            }
            if (*v.hi - *v.lo > tol) return false;
            out.push_back({*v.lo, *v.hi});
            return true;
        },
        opt);
    return out;
}

}  // namespace orbitgauge
