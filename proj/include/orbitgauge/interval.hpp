#pragma once

#include <algorithm>
#include <cmath>

#include "dyadic.hpp"

namespace orbitgauge {

template <class T>
struct Interval {
    T lo{};
    T hi{};
};

using DoubleInterval = Interval<double>;
using DyadicInterval = Interval<Dyadic>;

namespace detail {

// Directed double operations: the exact error term tells which way the
// round-to-nearest result moved.
inline double add_down(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return err < 0 ? std::nextafter(s, -INFINITY) : s;
}
inline double add_up(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return err > 0 ? std::nextafter(s, INFINITY) : s;
}
inline bool tiny(double p) { return p != 0.0 && std::fabs(p) < 1e-280; }
inline double mul_down(double a, double b) {
    double p = a * b;
    if (tiny(p)) return std::nextafter(p, -INFINITY);
    double err = std::fma(a, b, -p);
    return err < 0 ? std::nextafter(p, -INFINITY) : p;
}
inline double mul_up(double a, double b) {
    double p = a * b;
    if (tiny(p)) return std::nextafter(p, INFINITY);
    double err = std::fma(a, b, -p);
    return err > 0 ? std::nextafter(p, INFINITY) : p;
}
inline double div_down(double a, double b) {
    double q = a / b;
    if (tiny(q)) return std::nextafter(q, -INFINITY);
    double r = std::fma(-q, b, a);
    bool below = (r < 0) != (b < 0) && r != 0;
    return below ? std::nextafter(q, -INFINITY) : q;
}
inline double div_up(double a, double b) {
    double q = a / b;
    if (tiny(q)) return std::nextafter(q, INFINITY);
    double r = std::fma(-q, b, a);
    bool above = (r > 0) == (b > 0) && r != 0;
    return above ? std::nextafter(q, INFINITY) : q;
}

}  // namespace detail

// Interval arithmetic on doubles with outward rounding only when an
// operation is inexact.
struct DoubleArith {
    using Num = double;
    using I = DoubleInterval;

    I point(double x) const { return {x, x}; }
    I enclose(const Dyadic& d) const { return {d.to_double_down(), d.to_double_up()}; }
    I enclose(const Rational& q) const {
        return {orbitgauge::floor_to(q, 80).to_double_down(), orbitgauge::ceil_to(q, 80).to_double_up()};
    }
    I add(const I& a, const I& b) const { return {detail::add_down(a.lo, b.lo), detail::add_up(a.hi, b.hi)}; }
    I sub(const I& a, const I& b) const { return {detail::add_down(a.lo, -b.hi), detail::add_up(a.hi, -b.lo)}; }
    I mul(const I& a, const I& b) const {
        if (a.lo >= 0 && b.lo >= 0) return {detail::mul_down(a.lo, b.lo), detail::mul_up(a.hi, b.hi)};
        const double xs[4][2] = {{a.lo, b.lo}, {a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}};
        double lo = INFINITY, hi = -INFINITY;
        for (auto& p : xs) {
            lo = std::min(lo, detail::mul_down(p[0], p[1]));
            hi = std::max(hi, detail::mul_up(p[0], p[1]));
        }
        return {lo, hi};
    }
    I div(const I& a, const I& b) const {
        if (b.lo <= 0 && b.hi >= 0) throw DomainError("interval division by an interval containing zero");
        const double xs[4][2] = {{a.lo, b.lo}, {a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}};
        double lo = INFINITY, hi = -INFINITY;
        for (auto& p : xs) {
            lo = std::min(lo, detail::div_down(p[0], p[1]));
            hi = std::max(hi, detail::div_up(p[0], p[1]));
        }
        return {lo, hi};
    }
    static Dyadic to_dyadic(double x) { return Dyadic::from_double(x); }
};

// Interval arithmetic on dyadics; endpoints rounded outward to 2^-prec,
// or kept exact when prec < 0 (division is then unavailable).
struct DyadicArith {
    using Num = Dyadic;
    using I = DyadicInterval;
    long prec = -1;

    bool exact() const { return prec < 0; }
    Dyadic down(const Dyadic& x) const { return exact() ? x : x.floor_to(prec); }
    Dyadic up(const Dyadic& x) const { return exact() ? x : x.ceil_to(prec); }

    I point(const Dyadic& x) const { return {x, x}; }
    I enclose(const Dyadic& d) const { return {d, d}; }
    I enclose(const Rational& q) const {
        Dyadic d;
        if (as_dyadic(q, d)) return {d, d};
        if (exact()) throw DomainError("non-dyadic constant in exact dyadic mode");
        return {orbitgauge::floor_to(q, prec), orbitgauge::ceil_to(q, prec)};
    }
    I add(const I& a, const I& b) const { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
    I sub(const I& a, const I& b) const { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }
    I mul(const I& a, const I& b) const {
        if (a.lo.sign() >= 0 && b.lo.sign() >= 0) return {down(a.lo * b.lo), up(a.hi * b.hi)};
        Dyadic c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
        auto [mn, mx] = std::minmax_element(c, c + 4);
        return {down(*mn), up(*mx)};
    }
    I div(const I& a, const I& b) const {
        if (exact()) throw DomainError("division needs a finite working precision");
        if (b.lo.sign() <= 0 && b.hi.sign() >= 0) throw DomainError("interval division by an interval containing zero");
        const Dyadic* xs[4][2] = {{&a.lo, &b.lo}, {&a.lo, &b.hi}, {&a.hi, &b.lo}, {&a.hi, &b.hi}};
        Dyadic lo = div_round(*xs[0][0], *xs[0][1], prec, -1);
        Dyadic hi = div_round(*xs[0][0], *xs[0][1], prec, +1);
        for (int i = 1; i < 4; ++i) {
            lo = std::min(lo, div_round(*xs[i][0], *xs[i][1], prec, -1));
            hi = std::max(hi, div_round(*xs[i][0], *xs[i][1], prec, +1));
        }
        return {lo, hi};
    }
    static const Dyadic& to_dyadic(const Dyadic& x) { return x; }
};

inline DoubleInterval to_double_interval(const DyadicInterval& x) {
    return {x.lo.to_double_down(), x.hi.to_double_up()};
}
inline DyadicInterval to_dyadic_interval(const DoubleInterval& x) {
    return {Dyadic::from_double(x.lo), Dyadic::from_double(x.hi)};
}

}  // namespace orbitgauge
