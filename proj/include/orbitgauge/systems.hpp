#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <unordered_map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadic.hpp"
#include "errors.hpp"
#include "interval.hpp"

namespace orbitgauge {

enum class MapKind { rotation, doubling, tent, logistic, manneville_pw };
enum class Space { interval, circle };

inline const char* to_string(MapKind k) {
    switch (k) {
        case MapKind::rotation: return "rotation";
        case MapKind::doubling: return "doubling";
        case MapKind::tent: return "tent";
        case MapKind::logistic: return "logistic";
        case MapKind::manneville_pw: return "manneville_pw";
    }
    return "?";
}

// Working precision cap in bits, from ORBITGAUGE_MAX_PREC_BITS (default 4096).
inline long max_precision_bits() {
    if (const char* env = std::getenv("ORBITGAUGE_MAX_PREC_BITS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return 4096;
}

// Feigenbaum accumulation parameter, nearest 64-bit-mantissa dyadic.
inline Dyadic feigenbaum_lambda() { return {mpz_class("e479fd694bad59c6", 16), -62}; }
// An enclosure of the true constant around that dyadic.
inline DyadicInterval feigenbaum_lambda_enclosure() {
    Dyadic m = feigenbaum_lambda();
    Dyadic u = Dyadic::pow2(-62);
    return {m - u, m + u};
}

struct SystemSpec {
    MapKind kind = MapKind::doubling;
    Space space = Space::circle;
    Dyadic r;         // rotation number
    Dyadic lambda;    // logistic parameter
    Rational z;       // Manneville exponent
    Dyadic a;         // Manneville laminar boundary
    long zu = 0, zv = 1;  // z - 1 = zu / zv in lowest terms

    static SystemSpec rotation(const Dyadic& r) {
        if (r.sign() < 0 || r >= Dyadic(1)) throw ParameterError("rotation number must lie in [0,1)");
        SystemSpec s;
        s.kind = MapKind::rotation;
        s.space = Space::circle;
        s.r = r;
        return s;
    }
    static SystemSpec doubling() {
        SystemSpec s;
        s.kind = MapKind::doubling;
        s.space = Space::circle;
        return s;
    }
    static SystemSpec tent() {
        SystemSpec s;
        s.kind = MapKind::tent;
        s.space = Space::interval;
        return s;
    }
    static SystemSpec logistic(const Dyadic& lambda) {
        if (lambda.sign() <= 0 || lambda > Dyadic(4)) throw ParameterError("logistic parameter must lie in (0,4]");
        SystemSpec s;
        s.kind = MapKind::logistic;
        s.space = Space::interval;
        s.lambda = lambda;
        return s;
    }
    static SystemSpec logistic_feigenbaum() { return logistic(feigenbaum_lambda()); }
    static SystemSpec manneville(const Rational& z, const Dyadic& a) {
        if (z <= 2) throw ParameterError("Manneville exponent z must exceed 2");
        if (a.sign() <= 0 || a >= Dyadic(1)) throw ParameterError("Manneville parameter a must lie in (0,1)");
        Rational zm = z - 1;
        zm.canonicalize();
        if (!zm.get_num().fits_slong_p() || !zm.get_den().fits_slong_p() || zm.get_num() > 64 || zm.get_den() > 64)
            throw ParameterError("Manneville exponent z - 1 must be a fraction with small numerator and denominator");
        SystemSpec s;
        s.kind = MapKind::manneville_pw;
        s.space = Space::circle;
        s.z = z;
        s.a = a;
        s.zu = zm.get_num().get_si();
        s.zv = zm.get_den().get_si();
        return s;
    }

    // Maps whose orbits of dyadic points stay dyadic.
    bool exact_capable() const { return kind != MapKind::manneville_pw; }
    // Number of preimages of a generic point; used for the circle lift.
    int degree() const {
        switch (kind) {
            case MapKind::rotation: return 1;
            case MapKind::doubling:
            case MapKind::manneville_pw: return 2;
            default: return 0;
        }
    }

    std::string describe() const {
        std::string s = to_string(kind);
        switch (kind) {
            case MapKind::rotation: s += " r=" + r.to_hex(); break;
            case MapKind::logistic: s += " lambda=" + lambda.to_hex(); break;
            case MapKind::manneville_pw: s += " z=" + z.get_str() + " a=" + a.to_hex(); break;
            default: break;
        }
        return s;
    }
};

// Modulus of uniform continuity: d(x,y) < 2^-f(n) implies d(Tx,Ty) < 2^-n.
struct ModulusCertificate {
    long offset = 0;          // closed form n + offset
    std::vector<long> table;  // optional tabulated values for small n

    long operator()(long n) const {
        if (n >= 0 && static_cast<std::size_t>(n) < table.size()) return table[static_cast<std::size_t>(n)];
        return n + offset;
    }
};

// ---------------------------------------------------------------------------
// Manneville breakpoints xi_k = a / (k+1)^(1/(z-1)), xi_{-1} = 1.

namespace detail {

inline mpz_class pow_ui(const mpz_class& b, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

// Enclosure of xi_j with endpoints on the 2^-p grid.
inline DyadicInterval manneville_xi(const SystemSpec& s, const mpz_class& j, long p) {
    if (j < 0) return {Dyadic(1), Dyadic(1)};
    if (j == 0) return {s.a, s.a};
    // M = floor(((2^p a)^u / (j+1)^v)^(1/u))
    long sh = p + s.a.exponent();
    mpz_class A = s.a.mantissa();
    if (sh >= 0)
        mpz_mul_2exp(A.get_mpz_t(), A.get_mpz_t(), static_cast<mp_bitcnt_t>(sh));
    else
        mpz_fdiv_q_2exp(A.get_mpz_t(), A.get_mpz_t(), static_cast<mp_bitcnt_t>(-sh));
    mpz_class num = pow_ui(A, static_cast<unsigned long>(s.zu));
    mpz_class den = pow_ui(mpz_class(j + 1), static_cast<unsigned long>(s.zv));
    mpz_class q, M;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    mpz_root(M.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(s.zu));
    // floor of A (when sh < 0) only lowers the value, so M stays a lower bound.
    return {Dyadic(M, -p), Dyadic(M + 1, -p)};
}

// Branch k >= 1 with xi_k <= x < xi_{k-1}, for exact 0 < x < a.
inline mpz_class manneville_branch(const SystemSpec& s, const Dyadic& x) {
    // smallest m with m^v >= (a/x)^u, then k = m - 1
    long sh = s.a.exponent() - x.exponent();
    mpz_class num = pow_ui(s.a.mantissa(), static_cast<unsigned long>(s.zu));
    mpz_class den = pow_ui(x.mantissa(), static_cast<unsigned long>(s.zu));
    if (sh >= 0)
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(sh * s.zu));
    else
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-sh * s.zu));
    mpz_class N;
    mpz_cdiv_q(N.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    mpz_class m;
    mpz_root(m.get_mpz_t(), N.get_mpz_t(), static_cast<unsigned long>(s.zv));
    if (pow_ui(m, static_cast<unsigned long>(s.zv)) < N) m += 1;
    return m - 1;
}

}  // namespace detail

inline std::vector<Dyadic> manneville_breakpoints(const Rational& z, const Dyadic& a, long kmax, long prec) {
    if (kmax < 0) throw ArgumentError("kmax must be nonnegative");
    if (prec > max_precision_bits()) throw PrecisionExhausted("requested precision exceeds the configured cap");
    SystemSpec s = SystemSpec::manneville(z, a);
    std::vector<Dyadic> out;
    out.reserve(static_cast<std::size_t>(kmax) + 1);
    for (long k = 0; k <= kmax; ++k) {
        // nearest value at prec+1 from an enclosure at prec+2
        DyadicInterval e = detail::manneville_xi(s, mpz_class(k), prec + 2);
        out.push_back(e.lo.nearest_to(prec + 1));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] < out[i - 1]))
            throw PrecisionExhausted("breakpoints not separated at precision " + std::to_string(prec));
    return out;
}

// Cache of breakpoint enclosures used while iterating one system.
class MannevilleTable {
public:
    explicit MannevilleTable(const SystemSpec& s) : s_(s) {}

    const DyadicInterval& xi(const mpz_class& k, long p) {
        auto it = cache_.find(k);
        if (it != cache_.end() && it->second.second >= p) return it->second.first;
        auto& slot = cache_[k];
        slot = {detail::manneville_xi(s_, k, p), p};
        return slot.first;
    }

    const DoubleInterval& xi_double(long k) {
        if (k < 0) return one_;
        if (k >= kDense) {
            auto it = sparse_.find(k);
            if (it == sparse_.end())
                it = sparse_.emplace(k, to_double_interval(detail::manneville_xi(s_, mpz_class(k), 80))).first;
            return it->second;
        }
        if (static_cast<std::size_t>(k) >= dbl_.size()) {
            std::size_t old = dbl_.size();
            dbl_.resize(std::max<std::size_t>(static_cast<std::size_t>(k) + 1, 2 * old + 16));
            for (std::size_t i = old; i < dbl_.size(); ++i)
                dbl_[i] = to_double_interval(detail::manneville_xi(s_, mpz_class(static_cast<unsigned long>(i)), 80));
        }
        return dbl_[static_cast<std::size_t>(k)];
    }

private:
    SystemSpec s_;
    std::map<mpz_class, std::pair<DyadicInterval, long>> cache_;
    static constexpr long kDense = 1L << 16;
    std::vector<DoubleInterval> dbl_;
    std::unordered_map<long, DoubleInterval> sparse_;
    DoubleInterval one_{1.0, 1.0};
};

// ---------------------------------------------------------------------------
// Evaluation of the map (circle maps via their lift on [0,1)).

namespace detail {

template <class Arith>
typename Arith::I manneville_branch_value(const Arith& ar, MannevilleTable& tab, const SystemSpec& s,
                                          const typename Arith::I& X, const mpz_class& k) {
    using I = typename Arith::I;
    auto xi = [&](const mpz_class& j) -> I {
        if constexpr (std::is_same_v<Arith, DoubleArith>) {
            if (j.fits_slong_p() && j < 4000000) return tab.xi_double(j.get_si());
            return to_double_interval(tab.xi(j, 80));
        } else {
            return tab.xi(j, ar.prec + 8);
        }
    };
    I xk = xi(k), xk1 = xi(k - 1), xk2 = xi(k - 2);
    I gap = ar.sub(xk1, xk);
    // breakpoints closer than the working precision: the branch image is enough
    if (!(gap.lo > 0)) return {xk1.lo, xk2.hi};
    I slope = ar.div(ar.sub(xk2, xk1), gap);
    I v = ar.add(ar.mul(ar.sub(X, xk), slope), xk1);
    // the branch maps [xi_k, xi_{k-1}) into [xi_{k-1}, xi_{k-2})
    if (v.lo < xk1.lo) v.lo = xk1.lo;
    if (v.hi > xk2.hi) v.hi = xk2.hi;
    return v;
}

template <class Arith>
typename Arith::I manneville_lift(const Arith& ar, MannevilleTable& tab, const SystemSpec& s,
                                  const typename Arith::Num& x) {
    using I = typename Arith::I;
    I X = ar.point(x);
    if (x == 0) return X;
    Dyadic xd = Arith::to_dyadic(x);
    if (!(xd < s.a)) {
        I one = ar.point(typename Arith::Num(1));
        I A = ar.enclose(s.a);
        return ar.add(one, ar.div(ar.sub(X, A), ar.sub(one, A)));
    }
    if constexpr (std::is_same_v<Arith, DoubleArith>) {
        // estimate the branch in floating point, confirm with enclosures
        double ad = s.a.to_double();
        double est = std::pow(ad / x, static_cast<double>(s.zu) / static_cast<double>(s.zv)) - 1.0;
        if (est < 1) est = 1;
        if (est < 1e15) {
            long k = static_cast<long>(est);
            for (int tries = 0; tries < 4; ++tries) {
                const DoubleInterval& lo = tab.xi_double(k);
                const DoubleInterval& hi = tab.xi_double(k - 1);
                if (lo.hi <= x && x < hi.lo) return manneville_branch_value(ar, tab, s, X, mpz_class(k));
                if (x < lo.lo) { ++k; continue; }
                if (x >= hi.hi && k > 1) { --k; continue; }
                // too close to a breakpoint to decide: both sides agree there
                long k2 = x < lo.hi ? k + 1 : k - 1;
                if (k2 < 1) k2 = 1;
                I v1 = manneville_branch_value(ar, tab, s, X, mpz_class(k));
                I v2 = manneville_branch_value(ar, tab, s, X, mpz_class(k2));
                return {std::min(v1.lo, v2.lo), std::max(v1.hi, v2.hi)};
            }
        }
    }
    return manneville_branch_value(ar, tab, s, X, manneville_branch(s, xd));
}

template <class Arith>
typename Arith::I logistic_point(const Arith& ar, const SystemSpec& s, const typename Arith::Num& x) {
    using I = typename Arith::I;
    I X = ar.point(x);
    I one = ar.point(typename Arith::Num(1));
    return ar.mul(ar.mul(ar.enclose(s.lambda), X), ar.sub(one, X));
}

}  // namespace detail

namespace detail {
template <class Num>
Num num_half() {
    if constexpr (std::is_same_v<Num, double>)
        return 0.5;
    else
        return Dyadic::pow2(-1);
}
template <class Num>
Num num_floor(const Num& x) {
    if constexpr (std::is_same_v<Num, double>)
        return std::floor(x);
    else
        return Dyadic(x.floor(), 0);
}
}  // namespace detail

// Value of the lift (circle) or the map (interval) at an exact point x.
template <class Arith>
typename Arith::I lift_point(const Arith& ar, const SystemSpec& s, const typename Arith::Num& x,
                             MannevilleTable* tab) {
    using Num = typename Arith::Num;
    using I = typename Arith::I;
    switch (s.kind) {
        case MapKind::rotation: return ar.add(ar.point(x), ar.enclose(s.r));
        case MapKind::doubling: return ar.add(ar.point(x), ar.point(x));
        case MapKind::tent: {
            I X = ar.point(x);
            if (x <= detail::num_half<Num>()) return ar.add(X, X);
            I two = ar.point(Num(2));
            return ar.sub(two, ar.add(X, X));
        }
        case MapKind::logistic: return detail::logistic_point(ar, s, x);
        case MapKind::manneville_pw: {
            if (!tab) throw ArgumentError("Manneville evaluation needs a breakpoint table");
            return detail::manneville_lift(ar, *tab, s, x);
        }
    }
    return {};
}


// Image of an enclosure. Circle enclosures are lifted: lo in [0,1), hi - lo < 1.
// Interval-space images are clipped to [0,1].
template <class Arith>
typename Arith::I image(const Arith& ar, const SystemSpec& s, const typename Arith::I& x, MannevilleTable* tab) {
    using Num = typename Arith::Num;
    using I = typename Arith::I;
    if (s.space == Space::circle) {
        Num fl = detail::num_floor(x.hi);
        Num hi_red = x.hi - fl;
        I a = lift_point(ar, s, x.lo, tab);
        I b = (x.hi == x.lo) ? a : lift_point(ar, s, hi_red, tab);
        Num shift = fl * Num(s.degree());
        I r{a.lo, b.hi};
        if (!(fl == Num(0))) r.hi = ar.add(ar.point(b.hi), ar.point(shift)).hi;
        Num f = detail::num_floor(r.lo);
        if (!(f == Num(0))) {
            r.lo = ar.sub(ar.point(r.lo), ar.point(f)).lo;
            r.hi = ar.sub(ar.point(r.hi), ar.point(f)).hi;
        }
        return r;
    }
    Num half = detail::num_half<Num>();
    I r;
    if (s.kind == MapKind::tent || s.kind == MapKind::logistic) {
        if (x.hi <= half) {
            r = {lift_point(ar, s, x.lo, tab).lo, lift_point(ar, s, x.hi, tab).hi};
        } else if (x.lo >= half) {
            r = {lift_point(ar, s, x.hi, tab).lo, lift_point(ar, s, x.lo, tab).hi};
        } else {
            I a = lift_point(ar, s, x.lo, tab), b = lift_point(ar, s, x.hi, tab), m = lift_point(ar, s, half, tab);
            r = {std::min(a.lo, b.lo), m.hi};
        }
    } else {
        throw ArgumentError("unsupported interval map");
    }
    if (r.lo < Num(0)) r.lo = Num(0);
    if (r.hi > Num(1)) r.hi = Num(1);
    return r;
}

inline void check_in_space(const SystemSpec& s, const Rational& x) {
    if (x < 0 || x > 1 || (s.space == Space::circle && x == 1))
        throw DomainError("point " + x.get_str() + " lies outside the phase space");
}
inline void check_in_space(const SystemSpec& s, const Dyadic& x) {
    if (x.sign() < 0 || x > Dyadic(1) || (s.space == Space::circle && x == Dyadic(1)))
        throw DomainError("point " + x.to_hex() + " lies outside the phase space");
}

// Exact image of a dyadic point, for maps that preserve dyadics.
inline Dyadic step_exact(const SystemSpec& s, const Dyadic& x) {
    switch (s.kind) {
        case MapKind::rotation: {
            Dyadic y = x + s.r;
            return y >= Dyadic(1) ? y - Dyadic(1) : y;
        }
        case MapKind::doubling: {
            Dyadic y = x.shifted(1);
            return y >= Dyadic(1) ? y - Dyadic(1) : y;
        }
        case MapKind::tent: return x <= Dyadic::pow2(-1) ? x.shifted(1) : Dyadic(2) - x.shifted(1);
        case MapKind::logistic: return s.lambda * x * (Dyadic(1) - x);
        case MapKind::manneville_pw: throw ArgumentError("Manneville map has no exact dyadic step");
    }
    return {};
}

// Exact image of a rational point, for maps with rational coefficients.
inline Rational step_exact(const SystemSpec& s, const Rational& x) {
    Rational y;
    switch (s.kind) {
        case MapKind::rotation: y = x + s.r.to_rational(); break;
        case MapKind::doubling: y = 2 * x; break;
        case MapKind::tent: y = x <= Rational(1, 2) ? Rational(2 * x) : Rational(2 - 2 * x); break;
        case MapKind::logistic: y = s.lambda.to_rational() * x * (1 - x); break;
        case MapKind::manneville_pw: {
            Rational a = s.a.to_rational();
            if (x >= a) {
                y = (x - a) / (1 - a);
                break;
            }
            if (x == 0) return x;
            throw ArgumentError("Manneville laminar branches have irrational coefficients");
        }
    }
    y.canonicalize();
    if (s.space == Space::circle && y >= 1) y -= 1;
    return y;
}

// Evaluate T(x) to within 2^-prec.
inline Dyadic eval_map(const SystemSpec& s, const Dyadic& x, long prec) {
    check_in_space(s, x);
    if (prec < 0) throw ArgumentError("precision must be nonnegative");
    long cap = max_precision_bits();
    if (prec > cap) throw PrecisionExhausted("precision " + std::to_string(prec) + " exceeds cap " + std::to_string(cap));
    if (s.exact_capable()) return step_exact(s, x).nearest_to(prec);
    MannevilleTable tab(s);
    for (long guard = 16;; guard *= 2) {
        long p = prec + guard;
        if (p > cap + 64) break;
        DyadicArith ar{p};
        DyadicInterval v = lift_point(ar, s, x, &tab);
        if (v.hi - v.lo <= Dyadic::pow2(-(prec + 1))) {
            Dyadic y = (v.lo + v.hi).shifted(-1).nearest_to(prec + 1);
            if (s.space == Space::circle) y = y.frac();
            return y;
        }
    }
    throw PrecisionExhausted("eval_map could not reach " + std::to_string(prec) + " bits within the cap");
}

// Slope bound used for the Lipschitz modulus of the Manneville map.
inline double manneville_lipschitz(const SystemSpec& s) {
    MannevilleTable tab(s);
    double L = 1.0 / (1.0 - s.a.to_double_up());
    L = std::nextafter(L, INFINITY);
    for (long k = 1; k <= 256; ++k) {
        DoubleInterval a = tab.xi_double(k - 2), b = tab.xi_double(k - 1), c = tab.xi_double(k);
        double sk = (a.hi - b.lo) / (b.lo - c.hi);
        L = std::max(L, std::nextafter(sk, INFINITY));
    }
    return L;
}

inline ModulusCertificate modulus(const SystemSpec& s) {
    ModulusCertificate c;
    switch (s.kind) {
        case MapKind::rotation: c.offset = 0; break;
        case MapKind::doubling:
        case MapKind::tent: c.offset = 1; break;
        case MapKind::logistic: {
            // |T'| <= lambda
            double l = s.lambda.to_double_up();
            c.offset = static_cast<long>(std::ceil(std::log2(l)));
            if (c.offset < 0) c.offset = 0;
            break;
        }
        case MapKind::manneville_pw:
            c.offset = static_cast<long>(std::ceil(std::log2(manneville_lipschitz(s))));
            break;
    }
    return c;
}

inline Rational distance(Space sp, const Rational& x, const Rational& y) {
    Rational d = abs(x - y);
    if (sp == Space::circle) {
        d -= mpz_class(d.get_num() / d.get_den());
        if (d > Rational(1, 2)) d = 1 - d;
    }
    return d;
}
inline double distance(Space sp, double x, double y) {
    double d = std::fabs(x - y);
    if (sp == Space::circle) {
        d -= std::floor(d);
        d = std::min(d, 1.0 - d);
    }
    return d;
}

}  // namespace orbitgauge
