#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "symbolic.hpp"

namespace orbitgauge {

// lz78: the plain incremental-dictionary code.
// mixture: a selector plus the shortest of literal, lz78, adaptive context
// models of order 0..max_order, lag-context models, and an eventually-periodic
// code.
enum class EstimatorKind { lz78, mixture };

struct InfoEstimator {
    EstimatorKind kind = EstimatorKind::mixture;
    int max_order = 6;
};

inline long ceil_log2(unsigned long long v) {
    long b = 0;
    while ((1ULL << b) < v && b < 63) ++b;
    return b;
}
inline long floor_log2(unsigned long long v) {
    long b = -1;
    while (v) {
        v >>= 1;
        ++b;
    }
    return b;
}
inline long elias_gamma_length(unsigned long long v) { return 2 * floor_log2(v) + 1; }
inline long elias_delta_length(unsigned long long v) {
    long l = floor_log2(v);
    return l + elias_gamma_length(static_cast<unsigned long long>(l) + 1);
}

// Bits spent telling the decoder the length n.
inline long length_header_bits(std::size_t n) { return elias_delta_length(n + 1); }

namespace detail {

// Per-prefix code lengths: out[i] is the cost of the first ends[i] symbols.
inline std::vector<double> lz78_prefix_bits(const std::vector<std::uint32_t>& s, std::uint32_t N,
                                            const std::vector<std::size_t>& ends) {
    std::vector<double> out(ends.size(), 0.0);
    const long symbol_bits = ceil_log2(N);
    std::unordered_map<std::uint64_t, std::uint32_t> trie;  // (node, symbol) -> child
    trie.reserve(s.size() / 4 + 16);
    std::uint32_t nodes = 1, node = 0;
    long phrases = 0;
    double done = 0;  // cost of completed phrases
    std::size_t e = 0;
    for (std::size_t i = 0; i < s.size() && e < ends.size(); ++i) {
        std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | s[i];
        auto it = trie.find(key);
        bool open = true;
        if (it != trie.end()) {
            node = it->second;
        } else {
            trie.emplace(key, nodes++);
            ++phrases;
            done += static_cast<double>(ceil_log2(static_cast<unsigned long long>(phrases)) + symbol_bits);
            node = 0;
            open = false;
        }
        while (e < ends.size() && ends[e] == i + 1) {
            double v = done;
            if (open) v += static_cast<double>(ceil_log2(static_cast<unsigned long long>(phrases + 1)) + symbol_bits);
            out[e++] = v;
        }
    }
    return out;
}

// Adaptive order-k context model with escape counts (method C).
inline std::vector<double> context_prefix_bits(const std::vector<std::uint32_t>& s, std::uint32_t N, int k,
                                               const std::vector<std::size_t>& ends) {
    std::vector<double> out(ends.size(), 0.0);
    struct Ctx {
        std::uint32_t total = 0, distinct = 0;
    };
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint32_t>& k) const {
            return std::hash<std::uint64_t>{}(k.first * 0x9e3779b97f4a7c15ULL + k.second);
        }
    };
    std::unordered_map<std::uint64_t, Ctx> ctx;
    std::unordered_map<std::pair<std::uint64_t, std::uint32_t>, std::uint32_t, KeyHash> cnt;
    ctx.reserve(1024);
    cnt.reserve(4096);
    const std::uint64_t base = static_cast<std::uint64_t>(N) + 1;
    const double logN = std::log2(static_cast<double>(N));
    double bits = 0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < s.size() && e < ends.size(); ++i) {
        // context id from the previous min(i, k) symbols, length-tagged
        std::uint64_t h = static_cast<std::uint64_t>(std::min<std::size_t>(i, static_cast<std::size_t>(k)));
        for (std::size_t j = 1; j <= static_cast<std::size_t>(k) && j <= i; ++j) h = h * base + s[i - j] + 1;
        Ctx& c = ctx[h];
        auto& n = cnt[{h, s[i]}];
        if (N > 1) {
            if (c.total == 0) {
                bits += logN;
            } else if (n > 0) {
                bits -= std::log2(static_cast<double>(n) / (c.total + c.distinct));
            } else {
                bits -= std::log2(static_cast<double>(c.distinct) / (c.total + c.distinct));
                bits += std::log2(static_cast<double>(N - c.distinct));
            }
        }
        if (n == 0) ++c.distinct;
        ++n;
        ++c.total;
        while (e < ends.size() && ends[e] == i + 1) out[e++] = bits + 2.0;
    }
    return out;
}

// Lag-p context model: symbol i is predicted from symbol i - p (escape
// counts as above). Catches long-range repetition with sparse defects, as in
// period-doubling codings.
inline std::vector<double> lag_prefix_bits(const std::vector<std::uint32_t>& s, std::uint32_t N, std::size_t p,
                                           const std::vector<std::size_t>& ends) {
    std::vector<double> out(ends.size(), 0.0);
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> ctx;  // total, distinct
    std::unordered_map<std::uint64_t, std::uint32_t> cnt;
    const double logN = std::log2(static_cast<double>(N));
    double bits = 0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < s.size() && e < ends.size(); ++i) {
        std::uint32_t h = i >= p ? s[i - p] : N;
        auto& c = ctx[h];
        auto& n = cnt[(static_cast<std::uint64_t>(h) << 32) | s[i]];
        if (N > 1) {
            double tot = static_cast<double>(c.first + c.second);
            if (c.first == 0) {
                bits += logN;
            } else if (n > 0) {
                bits -= std::log2(static_cast<double>(n) / tot);
            } else {
                bits -= std::log2(static_cast<double>(c.second) / tot);
                bits += std::log2(static_cast<double>(N - c.second));
            }
        }
        if (n == 0) ++c.second;
        ++n;
        ++c.first;
        while (e < ends.size() && ends[e] == i + 1) out[e++] = bits;
    }
    return out;
}

// Lags tried by the mixture: 2^a and 3 2^a below n/2.
inline std::vector<std::size_t> mixture_lags(std::size_t n) {
    std::vector<std::size_t> v;
    for (std::size_t p = 1; 2 * p <= n; p *= 2) {
        v.push_back(p);
        if (p >= 2 && 2 * (3 * p / 2) <= n) v.push_back(3 * p / 2);
    }
    std::sort(v.begin(), v.end());
    return v;
}

// Eventually periodic code for a whole string; nullopt when no candidate
// beats `limit`.
inline std::optional<double> periodic_bits(const std::vector<std::uint32_t>& s, std::size_t n, std::uint32_t N,
                                           double limit) {
    const long b = ceil_log2(N);
    std::optional<double> best;
    for (std::size_t p = 1; p <= n; ++p) {
        double floor_cost = static_cast<double>(elias_gamma_length(p) + static_cast<long>(p) * b + 1);
        double cap = best ? std::min(*best, limit) : limit;
        if (floor_cost >= cap) break;
        // smallest t with s[i] == s[i+p] for all t <= i < n-p
        std::size_t t = n - p;
        while (t > 0 && s[t - 1] == s[t - 1 + p]) --t;
        double c = static_cast<double>(elias_gamma_length(t + 1) + elias_gamma_length(p)) +
                   static_cast<double>(t + p) * static_cast<double>(b);
        if (!best || c < *best) best = c;
    }
    return best;
}

}  // namespace detail

// Conditional information (length given) of every prefix s[0..ends[i]).
inline std::vector<double> cond_info_prefixes(const SymbolicString& str, const std::vector<std::size_t>& ends,
                                              const InfoEstimator& est = {}) {
    const auto& s = str.symbols;
    for (std::size_t i = 0; i < ends.size(); ++i) {
        if (ends[i] > s.size()) throw ArgumentError("prefix longer than the string");
        if (i > 0 && ends[i] <= ends[i - 1]) throw ArgumentError("prefix lengths must increase");
    }
    const std::uint32_t N = std::max<std::uint32_t>(str.alphabet, 1);
    for (auto v : s)
        if (v >= N) throw ArgumentError("symbol outside the alphabet");
    std::vector<double> lz = detail::lz78_prefix_bits(s, N, ends);
    std::vector<double> out(ends.size());
    if (est.kind == EstimatorKind::lz78) {
        for (std::size_t i = 0; i < ends.size(); ++i) out[i] = ends[i] == 0 ? 0.0 : lz[i];
        return out;
    }
    const int methods = 4 + (est.max_order + 1);
    const double selector = static_cast<double>(ceil_log2(static_cast<unsigned long long>(methods)));
    std::vector<double> best = lz;
    const long b = ceil_log2(N);
    for (std::size_t i = 0; i < ends.size(); ++i)
        best[i] = std::min(best[i], static_cast<double>(ends[i]) * static_cast<double>(b));
    const int order_cap = static_cast<int>(56.0 / std::log2(static_cast<double>(N) + 1.0));
    for (int k = 0; k <= std::min(est.max_order, order_cap); ++k) {
        auto c = detail::context_prefix_bits(s, N, k, ends);
        for (std::size_t i = 0; i < ends.size(); ++i) best[i] = std::min(best[i], c[i]);
    }
    auto lags = detail::mixture_lags(ends.empty() ? 0 : ends.back());
    for (std::size_t li = 0; li < lags.size(); ++li) {
        auto c = detail::lag_prefix_bits(s, N, lags[li], ends);
        double tag = 2.0 + static_cast<double>(elias_gamma_length(li + 1));
        for (std::size_t i = 0; i < ends.size(); ++i)
            if (2 * lags[li] <= ends[i]) best[i] = std::min(best[i], c[i] + tag);
    }
    for (std::size_t i = 0; i < ends.size(); ++i) {
        if (ends[i] == 0) {
            out[i] = 0;
            continue;
        }
        if (auto pb = detail::periodic_bits(s, ends[i], N, best[i])) best[i] = std::min(best[i], *pb);
        out[i] = selector + best[i];
    }
    return out;
}

inline double cond_info_content(const SymbolicString& s, std::size_t n, const InfoEstimator& est = {}) {
    if (n != s.size()) throw ArgumentError("conditional length does not match the string");
    if (n == 0) return 0;
    return cond_info_prefixes(s, {n}, est)[0];
}

inline double info_content(const SymbolicString& s, const InfoEstimator& est = {}) {
    if (s.size() == 0) return 0;
    return cond_info_content(s, s.size(), est) + static_cast<double>(length_header_bits(s.size()));
}

// ---------------------------------------------------------------------------

struct ScalingFunction {
    enum class Kind { identity, log2, power, n_over_log };
    Kind kind = Kind::identity;
    double alpha = 1.0;

    static ScalingFunction identity() { return {}; }
    static ScalingFunction log2() { return {Kind::log2, 1.0}; }
    static ScalingFunction power(double a) {
        if (!(a > 0)) throw ArgumentError("power exponent must be positive");
        return {Kind::power, a};
    }
    static ScalingFunction n_over_log() { return {Kind::n_over_log, 1.0}; }

    double operator()(double n) const {
        switch (kind) {
            case Kind::identity: return n;
            case Kind::log2: return std::log2(n);
            case Kind::power: return std::pow(n, alpha);
            case Kind::n_over_log: return n / std::log2(n);
        }
        return n;
    }
    bool sublinear() const { return kind != Kind::identity && !(kind == Kind::power && alpha >= 1); }
    std::string name() const {
        switch (kind) {
            case Kind::identity: return "identity";
            case Kind::log2: return "log2";
            case Kind::power: {
                std::string a = std::to_string(alpha);
                while (a.size() > 1 && a.back() == '0') a.pop_back();
                if (a.back() == '.') a.pop_back();
                return "power(" + a + ")";
            }
            case Kind::n_over_log: return "n_over_log";
        }
        return "?";
    }
    static ScalingFunction parse(const std::string& text) {
        std::string t = trim(text);
        if (t == "identity" || t == "id") return identity();
        if (t == "log2" || t == "log") return log2();
        if (t == "n_over_log") return n_over_log();
        if (t.rfind("power(", 0) == 0 && t.back() == ')') {
            std::string a = t.substr(6, t.size() - 7);
            char* end = nullptr;
            double v = std::strtod(a.c_str(), &end);
            if (end == a.c_str() || *end != '\0') throw ArgumentError("malformed scaling function '" + t + "'");
            return power(v);
        }
        throw ArgumentError("unknown scaling function '" + t + "'");
    }
};

inline std::vector<ScalingFunction> default_scaling_family() {
    return {ScalingFunction::identity(),   ScalingFunction::log2(),      ScalingFunction::power(0.25),
            ScalingFunction::power(0.5),   ScalingFunction::power(0.75), ScalingFunction::n_over_log()};
}

enum class InfoMode { plain, conditional };

struct InfoProfile {
    struct Point {
        long n = 0;
        double bits_plain = 0;
        double bits_conditional = 0;
    };
    std::vector<Point> checkpoints;
    std::string cover_id;
    std::string policy;

    double bits(std::size_t i, InfoMode m) const {
        return m == InfoMode::plain ? checkpoints[i].bits_plain : checkpoints[i].bits_conditional;
    }
};

inline InfoProfile profile_of(const SymbolicString& s, const std::vector<long>& checkpoints,
                              const InfoEstimator& est = {}) {
    std::vector<std::size_t> ends;
    for (long n : checkpoints) {
        if (n < 0) throw ArgumentError("negative checkpoint");
        ends.push_back(static_cast<std::size_t>(n));
    }
    auto cond = cond_info_prefixes(s, ends, est);
    InfoProfile p;
    p.cover_id = s.cover_id;
    p.policy = s.policy;
    for (std::size_t i = 0; i < ends.size(); ++i) {
        double plain = ends[i] == 0 ? 0.0 : cond[i] + static_cast<double>(length_header_bits(ends[i]));
        p.checkpoints.push_back({checkpoints[i], plain, cond[i]});
    }
    return p;
}

inline InfoProfile orbit_info_profile(const SystemSpec& sys, const Rational& x, const Cover& cover,
                                      const std::vector<long>& checkpoints, CodingPolicy policy = {},
                                      const InfoEstimator& est = {}, OrbitOptions opt = {}) {
    if (checkpoints.empty()) throw ArgumentError("no checkpoints");
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1]) throw ArgumentError("checkpoints must increase");
    SymbolicString s = symbolic_orbit(sys, x, cover, checkpoints.back(), policy, opt);
    return profile_of(s, checkpoints, est);
}

// Pointwise mean of profiles sharing checkpoints.
inline InfoProfile average_profiles(const std::vector<InfoProfile>& ps) {
    if (ps.empty()) throw ArgumentError("nothing to average");
    InfoProfile out = ps.front();
    for (std::size_t i = 0; i < out.checkpoints.size(); ++i) {
        double a = 0, b = 0;
        for (const auto& p : ps) {
            if (p.checkpoints.size() != out.checkpoints.size() || p.checkpoints[i].n != out.checkpoints[i].n)
                throw ArgumentError("profiles have different checkpoints");
            a += p.checkpoints[i].bits_plain;
            b += p.checkpoints[i].bits_conditional;
        }
        out.checkpoints[i].bits_plain = a / static_cast<double>(ps.size());
        out.checkpoints[i].bits_conditional = b / static_cast<double>(ps.size());
    }
    return out;
}

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y, double* r2 = nullptr) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw ArgumentError("degenerate fit");
    if (r2) *r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) return 0.0;
    return sxy / sxx;
}

inline std::size_t top_half_start(std::size_t m) { return m / 2; }

}  // namespace detail

// Finite-data limsup surrogate: least-squares slope of value against f(n)
// over the top half of the checkpoints, floored at 0. Additive constants
// cancel, so slowly converging ratios are not mistaken for growth.
inline double growth_rate(const std::vector<long>& ns, const std::vector<double>& values, const ScalingFunction& f) {
    if (ns.size() < 4) throw ArgumentError("need at least 4 checkpoints");
    std::vector<double> x, y;
    for (std::size_t i = detail::top_half_start(ns.size()); i < ns.size(); ++i) {
        x.push_back(f(static_cast<double>(ns[i])));
        y.push_back(values[i]);
    }
    return std::max(0.0, detail::ls_slope(x, y));
}

inline double complexity_indicator(const InfoProfile& p, const ScalingFunction& f, InfoMode mode) {
    std::vector<long> ns;
    std::vector<double> v;
    for (std::size_t i = 0; i < p.checkpoints.size(); ++i) {
        ns.push_back(p.checkpoints[i].n);
        v.push_back(p.bits(i, mode));
    }
    return growth_rate(ns, v, f);
}

// max of bits/f(n) over the top half; reported next to the slope estimate.
inline double ratio_indicator(const InfoProfile& p, const ScalingFunction& f, InfoMode mode) {
    if (p.checkpoints.size() < 4) throw ArgumentError("need at least 4 checkpoints");
    double m = 0;
    for (std::size_t i = detail::top_half_start(p.checkpoints.size()); i < p.checkpoints.size(); ++i)
        m = std::max(m, p.bits(i, mode) / f(static_cast<double>(p.checkpoints[i].n)));
    return m;
}

struct SupResult {
    double value = 0;
    std::size_t witness = 0;
    std::vector<double> per_cover;
    std::vector<InfoProfile> profiles;
};

inline SupResult sup_over_covers(const SystemSpec& sys, const Rational& x, const std::vector<Cover>& ladder,
                                 const ScalingFunction& f, InfoMode mode, const std::vector<long>& checkpoints,
                                 CodingPolicy policy = {}, const InfoEstimator& est = {}) {
    if (ladder.empty()) throw ArgumentError("empty cover ladder");
    SupResult r;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        InfoProfile p = orbit_info_profile(sys, x, ladder[i], checkpoints, policy, est);
        double v = complexity_indicator(p, f, mode);
        r.per_cover.push_back(v);
        r.profiles.push_back(std::move(p));
        if (i == 0 || v > r.value) {
            r.value = v;
            r.witness = i;
        }
    }
    return r;
}

struct GrowthFit {
    double alpha = 0;
    double r2 = 0;
    std::size_t excluded = 0;
};

// Slope of log2(bits) against log2(n) over the top half of the checkpoints.
inline GrowthFit fit_growth_exponent(const InfoProfile& p, InfoMode mode = InfoMode::conditional) {
    const auto& c = p.checkpoints;
    if (c.size() < 5) throw ArgumentError("need at least 5 checkpoints");
    if (static_cast<double>(c.back().n) < 100.0 * static_cast<double>(c.front().n))
        throw ArgumentError("checkpoints must span two decades");
    GrowthFit g;
    std::vector<double> x, y;
    for (std::size_t i = detail::top_half_start(c.size()); i < c.size(); ++i) {
        double b = p.bits(i, mode);
        if (!(b > 0) || c[i].n <= 0) {
            ++g.excluded;
            continue;
        }
        x.push_back(std::log2(static_cast<double>(c[i].n)));
        y.push_back(std::log2(b));
    }
    if (x.size() < 2) throw ArgumentError("too few positive checkpoints to fit");
    g.alpha = detail::ls_slope(x, y, &g.r2);
    return g;
}

}  // namespace orbitgauge
