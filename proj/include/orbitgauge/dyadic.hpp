#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace orbitgauge {

using Rational = mpq_class;

// Binary rational m * 2^e, kept with an odd mantissa (or zero with e = 0).
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long v) : m_(v) { normalize(); }  // NOLINT: implicit on purpose
    Dyadic(mpz_class m, long e) : m_(std::move(m)), e_(e) { normalize(); }

    static Dyadic from_double(double d) {
        if (!std::isfinite(d)) throw DomainError("non-finite double");
        if (d == 0.0) return {};
        int ex = 0;
        double fr = std::frexp(d, &ex);
        auto m = static_cast<std::int64_t>(std::ldexp(fr, 53));
        mpz_class mz;
        mpz_set_si(mz.get_mpz_t(), static_cast<long>(m));
        return {mz, static_cast<long>(ex) - 53};
    }

    // 2^k
    static Dyadic pow2(long k) { return {mpz_class(1), k}; }

    const mpz_class& mantissa() const { return m_; }
    long exponent() const { return e_; }
    bool is_zero() const { return m_ == 0; }
    int sign() const { return sgn(m_); }

    // Number of bits needed to write the value at its own resolution.
    std::size_t bit_size() const { return m_ == 0 ? 0 : mpz_sizeinbase(m_.get_mpz_t(), 2); }

    // floor(log2 |x|); undefined for zero.
    long msb() const { return static_cast<long>(bit_size()) - 1 + e_; }

    Rational to_rational() const {
        Rational q;
        if (e_ >= 0) {
            mpz_mul_2exp(q.get_num_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(e_));
        } else {
            q.get_num() = m_;
            mpz_set_ui(q.get_den_mpz_t(), 1);
            mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e_));
        }
        return q;
    }

    double to_double() const { return to_double_down(); }

    // Directed conversions: to_double_down() <= x <= to_double_up().
    double to_double_down() const { return directed_double(false); }
    double to_double_up() const { return directed_double(true); }

    Dyadic operator-() const {
        Dyadic r = *this;
        r.m_ = -r.m_;
        return r;
    }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        Dyadic r;
        if (a.e_ == b.e_) {
            r.m_ = a.m_ + b.m_;
            r.e_ = a.e_;
        } else if (a.e_ < b.e_) {
            mpz_mul_2exp(r.m_.get_mpz_t(), b.m_.get_mpz_t(), static_cast<mp_bitcnt_t>(b.e_ - a.e_));
            r.m_ += a.m_;
            r.e_ = a.e_;
        } else {
            mpz_mul_2exp(r.m_.get_mpz_t(), a.m_.get_mpz_t(), static_cast<mp_bitcnt_t>(a.e_ - b.e_));
            r.m_ += b.m_;
            r.e_ = b.e_;
        }
        r.normalize();
        return r;
    }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        if (a.is_zero() || b.is_zero()) return {};
        Dyadic r;
        r.m_ = a.m_ * b.m_;
        r.e_ = a.e_ + b.e_;
        return r;  // product of odd mantissas stays odd
    }
    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
    Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
    Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

    // x * 2^k
    Dyadic shifted(long k) const {
        Dyadic r = *this;
        if (!r.is_zero()) r.e_ += k;
        return r;
    }

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.e_ == b.e_ && a.m_ == b.m_; }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        int sa = a.sign(), sb = b.sign();
        if (sa != sb) return sa <=> sb;
        if (sa == 0) return std::strong_ordering::equal;
        long ma = a.msb(), mb = b.msb();
        if (ma != mb) return sa > 0 ? ma <=> mb : mb <=> ma;
        int c = (a - b).sign();
        return c <=> 0;
    }

    friend int cmp(const Dyadic& a, const Rational& q) {
        mpz_class lhs, rhs;
        if (a.e_ >= 0) {
            mpz_mul_2exp(lhs.get_mpz_t(), a.m_.get_mpz_t(), static_cast<mp_bitcnt_t>(a.e_));
            lhs *= q.get_den();
            rhs = q.get_num();
        } else {
            lhs = a.m_ * q.get_den();
            mpz_mul_2exp(rhs.get_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(-a.e_));
        }
        int c = mpz_cmp(lhs.get_mpz_t(), rhs.get_mpz_t());
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }

    // Largest multiple of 2^-p that is <= x (resp. smallest >=, nearest with ties up).
    Dyadic floor_to(long p) const { return round_to(p, -1); }
    Dyadic ceil_to(long p) const { return round_to(p, +1); }
    Dyadic nearest_to(long p) const { return (*this + pow2(-(p + 1))).floor_to(p); }

    mpz_class floor() const {
        mpz_class r;
        if (e_ >= 0)
            mpz_mul_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(e_));
        else
            mpz_fdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(-e_));
        return r;
    }

    // x - floor(x), in [0,1)
    Dyadic frac() const {
        if (e_ >= 0) return {};
        mpz_class r;
        mpz_fdiv_r_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(-e_));
        return {r, e_};
    }

    // Hex mantissa with binary exponent, e.g. 0x3p-2 for 0.75.
    std::string to_hex() const {
        std::string s = m_ < 0 ? "-0x" : "0x";
        mpz_class a = abs(m_);
        s += a.get_str(16);
        s += 'p';
        s += (e_ < 0 ? "-" : "+");
        s += std::to_string(e_ < 0 ? -e_ : e_);
        return s;
    }

private:
    void normalize() {
        if (m_ == 0) {
            e_ = 0;
            return;
        }
        auto z = mpz_scan1(m_.get_mpz_t(), 0);
        if (z > 0) {
            mpz_fdiv_q_2exp(m_.get_mpz_t(), m_.get_mpz_t(), z);
            e_ += static_cast<long>(z);
        }
    }

    Dyadic round_to(long p, int dir) const {
        if (is_zero() || e_ >= -p) return *this;
        mpz_class q;
        auto sh = static_cast<mp_bitcnt_t>(-p - e_);
        if (dir < 0)
            mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), sh);
        else
            mpz_cdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), sh);
        return {q, -p};
    }

    double directed_double(bool up) const {
        if (is_zero()) return 0.0;
        long ex = 0;
        double d = mpz_get_d_2exp(&ex, m_.get_mpz_t());  // truncated toward zero
        long total = ex + e_;
        bool exact = bit_size() <= 53;
        if (total > 1000) return sign() > 0 ? (up ? INFINITY : std::numeric_limits<double>::max())
                                            : (up ? -std::numeric_limits<double>::max() : -INFINITY);
        if (total < -1000) {
            if (sign() > 0) return up ? std::ldexp(1.0, -1000) : 0.0;
            return up ? 0.0 : -std::ldexp(1.0, -1000);
        }
        double v = std::ldexp(d, static_cast<int>(total));
        if (exact) return v;
        // truncation moved the value toward zero
        if (sign() > 0) return up ? std::nextafter(v, INFINITY) : v;
        return up ? v : std::nextafter(v, -INFINITY);
    }

    mpz_class m_;
    long e_ = 0;
};

// floor/ceil of q at resolution 2^-p.
inline Dyadic floor_to(const Rational& q, long p) {
    mpz_class n = q.get_num();
    if (p >= 0)
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(p));
    mpz_class d = q.get_den();
    if (p < 0) mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-p));
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return {r, -p};
}
inline Dyadic ceil_to(const Rational& q, long p) {
    mpz_class n = q.get_num();
    if (p >= 0)
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(p));
    mpz_class d = q.get_den();
    if (p < 0) mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-p));
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return {r, -p};
}

// floor(a/b) and ceil(a/b) at resolution 2^-p, without building rationals.
inline Dyadic div_round(const Dyadic& a, const Dyadic& b, long p, int dir) {
    if (b.is_zero()) throw DomainError("division by zero");
    if (a.is_zero()) return {};
    // a/b = (ma/mb) 2^(ea-eb); want floor(ma 2^(ea-eb+p) / mb) 2^-p
    long sh = a.exponent() - b.exponent() + p;
    mpz_class n = a.mantissa(), d = b.mantissa();
    if (sh >= 0)
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(sh));
    else
        mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-sh));
    mpz_class r;
    if (dir < 0)
        mpz_fdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    else
        mpz_cdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return {r, -p};
}

// Exact dyadic value of q, if its denominator is a power of two.
inline bool as_dyadic(const Rational& q, Dyadic& out) {
    const mpz_class& d = q.get_den();
    auto tz = mpz_scan1(d.get_mpz_t(), 0);
    if (mpz_sizeinbase(d.get_mpz_t(), 2) != tz + 1) return false;
    out = Dyadic(q.get_num(), -static_cast<long>(tz));
    return true;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Accepts "0x3p-2", "3/4", "0.75", "-2", "1e-3".
inline Rational parse_rational(std::string_view text) {
    std::string s = trim(text);
    if (s.empty()) throw ArgumentError("empty number");
    bool neg = false;
    std::string body = s;
    if (body[0] == '-' || body[0] == '+') {
        neg = body[0] == '-';
        body = body.substr(1);
    }
    auto bad = [&] { return ArgumentError("malformed number '" + s + "'"); };
    if (body.empty()) throw bad();
    Rational q;
    auto digits = [](const std::string& t, int base) {
        if (t.empty()) return false;
        for (char c : t)
            if (base == 10 ? !std::isdigit(static_cast<unsigned char>(c)) : !std::isxdigit(static_cast<unsigned char>(c)))
                return false;
        return true;
    };
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
        auto p = body.find_first_of("pP");
        std::string mant = body.substr(2, p == std::string::npos ? std::string::npos : p - 2);
        if (!digits(mant, 16)) throw bad();
        long ex = 0;
        if (p != std::string::npos) {
            std::string es = body.substr(p + 1);
            char* end = nullptr;
            ex = std::strtol(es.c_str(), &end, 10);
            if (es.empty() || *end != '\0') throw bad();
        }
        q = Dyadic(mpz_class(mant, 16), ex).to_rational();
    } else if (auto slash = body.find('/'); slash != std::string::npos) {
        std::string a = body.substr(0, slash), b = body.substr(slash + 1);
        if (!digits(a, 10) || !digits(b, 10)) throw bad();
        mpz_class den(b, 10);
        if (den == 0) throw ArgumentError("zero denominator in '" + s + "'");
        q = Rational(mpz_class(a, 10), den);
        q.canonicalize();
    } else {
        std::string mant = body;
        long ex10 = 0;
        if (auto ep = body.find_first_of("eE"); ep != std::string::npos) {
            std::string es = body.substr(ep + 1);
            char* end = nullptr;
            ex10 = std::strtol(es.c_str(), &end, 10);
            if (es.empty() || *end != '\0') throw bad();
            mant = body.substr(0, ep);
        }
        std::string ip = mant, fp;
        if (auto dot = mant.find('.'); dot != std::string::npos) {
            ip = mant.substr(0, dot);
            fp = mant.substr(dot + 1);
        }
        if (ip.empty() && fp.empty()) throw bad();
        if ((!ip.empty() && !digits(ip, 10)) || (!fp.empty() && !digits(fp, 10))) throw bad();
        mpz_class num(ip + fp, 10);
        long scale = static_cast<long>(fp.size()) - ex10;
        mpz_class ten = 10, pw;
        mpz_pow_ui(pw.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(scale)));
        if (scale >= 0)
            q = Rational(num, pw);
        else
            q = Rational(num * pw, 1);
        q.canonicalize();
    }
    return neg ? Rational(-q) : q;
}

inline Dyadic parse_dyadic(std::string_view text) {
    Rational q = parse_rational(text);
    Dyadic d;
    if (!as_dyadic(q, d)) throw ArgumentError("'" + trim(text) + "' is not a dyadic rational");
    return d;
}

// Bits 0.b1b2b3... given as hex digits, most significant first.
inline Dyadic dyadic_from_hex_bits(std::string_view hex) {
    std::string h = trim(hex);
    if (h.size() > 2 && h[0] == '0' && (h[1] == 'x' || h[1] == 'X')) h = h.substr(2);
    if (h.empty()) throw ArgumentError("empty bit string");
    for (char c : h)
        if (!std::isxdigit(static_cast<unsigned char>(c))) throw ArgumentError("malformed hex bit string '" + h + "'");
    return {mpz_class(h, 16), -4 * static_cast<long>(h.size())};
}

}  // namespace orbitgauge
