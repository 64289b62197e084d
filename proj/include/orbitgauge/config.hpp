#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "complexity.hpp"
#include "cover.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "symbolic.hpp"
#include "systems.hpp"

namespace orbitgauge {

struct ConfigKey {
    std::string name;
    std::string fallback;
    std::string help;
};

inline const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> keys = {
        {"system.kind", "doubling", "rotation | doubling | tent | logistic | manneville"},
        {"system.r", "", "rotation number as a rational or hex-p dyadic"},
        {"system.r_bits", "", "rotation number 0.<hex digits>"},
        {"system.lambda", "feigenbaum", "logistic parameter, or feigenbaum"},
        {"system.z", "3", "Manneville exponent"},
        {"system.a", "1/2", "Manneville laminar boundary (dyadic)"},
        {"cover.kind", "ladder", "ladder | binary | binary-nice"},
        {"cover.j_min", "2", "coarsest ladder level"},
        {"cover.j_max", "8", "finest ladder level"},
        {"orbit.x0", "seeded", "start point, or seeded for pseudorandom points"},
        {"orbit.points", "8", "number of seeded points"},
        {"orbit.point_bits", "64", "random bits per seeded point (0: checkpoint max + 64)"},
        {"orbit.checkpoints", "pow2:6..14", "list n1,n2,... or pow2:a..b"},
        {"orbit.policy", "canonical", "canonical | nice | beam"},
        {"orbit.beam_width", "8", "beam width"},
        {"estimator.kind", "mixture", "mixture | lz78"},
        {"estimator.max_order", "6", "largest context order in the mixture"},
        {"complexity.f", "default", "scaling functions, comma separated, or default"},
        {"complexity.mode", "conditional", "conditional | plain"},
        {"entropy.eps", "1/8,1/16", "epsilon ladder"},
        {"entropy.n", "2..12", "n ladder: list or a..b"},
        {"entropy.grid_bits_max", "20", "finest grid 2^-bits"},
        {"entropy.nets", "true", "also compute net witnesses"},
        {"entropy.join_j", "0", "ladder level of the cover used for join counts (0: off)"},
        {"entropy.join_n_max", "8", "largest n for join counts"},
        {"track.k", "20", "steps"},
        {"track.m", "30", "target accuracy 2^-m"},
        {"reconstruct.k", "4096", "observation length"},
        {"reconstruct.eps", "1/64", "cover radius"},
        {"reconstruct.trials", "100", "number of seeded rotation numbers"},
        {"experiment.name", "local-vs-global",
         "periodic | brudno | doubling-entropy | isometry | sandwich | tracker | rotation-reconstruction | "
         "local-vs-global | manneville-scan | feigenbaum"},
        {"experiment.z_list", "3,5", "Manneville exponents for the scan"},
        {"experiment.slack", "0.15", "slack for local <= global"},
        {"run.seed", "20240601", "seed for everything pseudorandom"},
        {"check.rate_min", "", "lower bound on the final plain rate"},
        {"check.rate_max", "", "upper bound on the final plain rate"},
    };
    return keys;
}

class Config {
public:
    Config() {
        for (const auto& k : config_schema()) values_[k.name] = k.fallback;
    }

    static bool known(const std::string& key) {
        for (const auto& k : config_schema())
            if (k.name == key) return true;
        return false;
    }

    void set(const std::string& key, const std::string& value, const std::string& where = "--set") {
        if (!known(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        values_[key] = value;
    }

    // "key=value" from the command line.
    void apply_override(const std::string& kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set " + kv + ": expected key=value");
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), "--set " + kv);
    }

    // Sections in [brackets]; keys inside a section get its name as prefix.
    void parse(const std::string& text, const std::string& source = "config") {
        std::istringstream in(text);
        std::string line, section;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string where = source + ":" + std::to_string(lineno);
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError(where + ": empty section name");
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(where + ": missing key");
            if (!section.empty()) key = section + "." + key;
            set(key, value, where);
        }
    }

    const std::string& raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
        return it->second;
    }

    long get_long(const std::string& key) const {
        const std::string& v = raw(key);
        try {
            std::size_t pos = 0;
            long x = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected an integer, got '" + v + "'");
        }
    }
    double get_double(const std::string& key) const {
        const std::string& v = raw(key);
        try {
            std::size_t pos = 0;
            double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected a number, got '" + v + "'");
        }
    }
    bool get_bool(const std::string& key) const {
        const std::string& v = raw(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(key + ": expected true or false, got '" + v + "'");
    }
    Rational get_rational(const std::string& key) const {
        try {
            return parse_rational(raw(key));
        } catch (const Error& e) {
            throw ConfigError(key + ": " + e.what());
        }
    }
    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    // Sorted "key = value" lines; the hash and --dry-run both use this.
    std::string resolved() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
        return out;
    }

    std::string hash_hex() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : resolved()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Typed views.

inline SystemSpec system_from(const Config& c) {
    const std::string& kind = c.raw("system.kind");
    try {
        if (kind == "doubling") return SystemSpec::doubling();
        if (kind == "tent") return SystemSpec::tent();
        if (kind == "rotation") {
            Dyadic r;
            if (!c.raw("system.r_bits").empty()) {
                r = dyadic_from_hex_bits(c.raw("system.r_bits"));
            } else if (!c.raw("system.r").empty()) {
                if (!as_dyadic(c.get_rational("system.r"), r))
                    throw ConfigError("system.r: rotation number must be dyadic");
            } else {
                throw ConfigError("system.r or system.r_bits is required for a rotation");
            }
            return SystemSpec::rotation(r);
        }
        if (kind == "logistic") {
            if (c.raw("system.lambda") == "feigenbaum") return SystemSpec::logistic_feigenbaum();
            Dyadic l;
            if (!as_dyadic(c.get_rational("system.lambda"), l))
                throw ConfigError("system.lambda: parameter must be dyadic");
            return SystemSpec::logistic(l);
        }
        if (kind == "manneville") {
            Dyadic a;
            if (!as_dyadic(c.get_rational("system.a"), a)) throw ConfigError("system.a: must be dyadic");
            return SystemSpec::manneville(c.get_rational("system.z"), a);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
    throw ConfigError("system.kind: unknown map '" + kind + "'");
}

inline std::vector<Cover> covers_from(const Config& c, Space sp) {
    const std::string& kind = c.raw("cover.kind");
    if (kind == "binary") return {binary_cover(sp)};
    if (kind == "binary-nice") return {binary_nice_cover(sp)};
    if (kind != "ladder") throw ConfigError("cover.kind: unknown cover '" + kind + "'");
    long a = c.get_long("cover.j_min"), b = c.get_long("cover.j_max");
    if (a < 1 || b > 16 || a > b) throw ConfigError("cover.j_min..cover.j_max must satisfy 1 <= j_min <= j_max <= 16");
    return cover_ladder(sp, a, b);
}

// "pow2:a..b", "a..b" or "n1,n2,...".
inline std::vector<long> parse_ladder(const std::string& key, const std::string& text) {
    std::vector<long> out;
    auto range = [&](const std::string& t, long& lo, long& hi) {
        auto dots = t.find("..");
        if (dots == std::string::npos) return false;
        try {
            lo = std::stol(t.substr(0, dots));
            hi = std::stol(t.substr(dots + 2));
        } catch (const std::exception&) {
            throw ConfigError(key + ": malformed range '" + t + "'");
        }
        if (lo > hi) throw ConfigError(key + ": empty range '" + t + "'");
        return true;
    };
    long lo = 0, hi = 0;
    if (text.rfind("pow2:", 0) == 0) {
        if (!range(text.substr(5), lo, hi) || lo < 0 || hi > 30) throw ConfigError(key + ": bad pow2 range");
        for (long e = lo; e <= hi; ++e) out.push_back(1L << e);
        return out;
    }
    if (range(text, lo, hi)) {
        if (hi - lo > 100000) throw ConfigError(key + ": range too long");
        for (long v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t pos = 0;
            out.push_back(std::stol(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected integers, got '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::vector<long> checkpoints_from(const Config& c) {
    auto v = parse_ladder("orbit.checkpoints", c.raw("orbit.checkpoints"));
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1]) throw ConfigError("orbit.checkpoints: must increase");
    if (v.front() < 1) throw ConfigError("orbit.checkpoints: must be positive");
    return v;
}

inline CodingPolicy policy_from(const Config& c) {
    const std::string& p = c.raw("orbit.policy");
    if (p == "canonical") return CodingPolicy::canonical();
    if (p == "nice") return CodingPolicy::nice();
    if (p == "beam") {
        long w = c.get_long("orbit.beam_width");
        if (w < 1 || w > 1024) throw ConfigError("orbit.beam_width: out of range");
        return CodingPolicy::beam(static_cast<int>(w));
    }
    throw ConfigError("orbit.policy: unknown policy '" + p + "'");
}

inline InfoEstimator estimator_from(const Config& c) {
    InfoEstimator e;
    const std::string& k = c.raw("estimator.kind");
    if (k == "mixture")
        e.kind = EstimatorKind::mixture;
    else if (k == "lz78")
        e.kind = EstimatorKind::lz78;
    else
        throw ConfigError("estimator.kind: unknown estimator '" + k + "'");
    long o = c.get_long("estimator.max_order");
    if (o < 0 || o > 12) throw ConfigError("estimator.max_order: out of range");
    e.max_order = static_cast<int>(o);
    return e;
}

inline std::vector<ScalingFunction> scaling_from(const Config& c) {
    auto items = c.get_list("complexity.f");
    if (items.size() == 1 && items[0] == "default") return default_scaling_family();
    std::vector<ScalingFunction> out;
    for (const auto& s : items) {
        try {
            out.push_back(ScalingFunction::parse(s));
        } catch (const Error& e) {
            throw ConfigError(std::string("complexity.f: ") + e.what());
        }
    }
    if (out.empty()) throw ConfigError("complexity.f: empty");
    return out;
}

inline InfoMode mode_from(const Config& c) {
    const std::string& m = c.raw("complexity.mode");
    if (m == "conditional") return InfoMode::conditional;
    if (m == "plain") return InfoMode::plain;
    throw ConfigError("complexity.mode: expected conditional or plain");
}

inline std::vector<Rational> eps_from(const Config& c) {
    std::vector<Rational> out;
    for (const auto& s : c.get_list("entropy.eps")) {
        Rational q;
        try {
            q = parse_rational(s);
        } catch (const Error& e) {
            throw ConfigError(std::string("entropy.eps: ") + e.what());
        }
        if (q <= 0 || q >= Rational(1, 2)) throw ConfigError("entropy.eps: values must lie in (0, 1/2)");
        out.push_back(q);
    }
    if (out.empty()) throw ConfigError("entropy.eps: empty");
    return out;
}

inline std::uint64_t seed_from(const Config& c) {
    long s = c.get_long("run.seed");
    if (s < 0) throw ConfigError("run.seed: must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

// Uniform dyadic points in [0,1) with the given number of random bits.
inline std::vector<Dyadic> seeded_points(std::uint64_t seed, std::size_t count, long bits) {
    std::mt19937_64 rng(seed);
    std::vector<Dyadic> out;
    for (std::size_t i = 0; i < count; ++i) {
        mpz_class m = 0;
        long words = (bits + 63) / 64;
        for (long w = 0; w < words; ++w) {
            mpz_class part;
            std::uint64_t u = rng();
            mpz_import(part.get_mpz_t(), 1, 1, sizeof u, 0, 0, &u);
            m = (m << 64) + part;
        }
        m >>= static_cast<unsigned long>(words * 64 - bits);
        out.push_back(Dyadic(m, -bits));
    }
    return out;
}

inline std::vector<Rational> points_from(const Config& c, const Space sp, long max_n) {
    const std::string& x = c.raw("orbit.x0");
    if (x != "seeded") {
        Rational q;
        try {
            q = parse_rational(x);
        } catch (const Error& e) {
            throw ConfigError(std::string("orbit.x0: ") + e.what());
        }
        if (q < 0 || q > 1 || (sp == Space::circle && q == 1)) throw ConfigError("orbit.x0: outside the space");
        return {q};
    }
    long count = c.get_long("orbit.points");
    if (count < 1 || count > 100000) throw ConfigError("orbit.points: out of range");
    long bits = c.get_long("orbit.point_bits");
    if (bits == 0) bits = max_n + 64;
    if (bits < 1) throw ConfigError("orbit.point_bits: must be nonnegative");
    std::vector<Rational> out;
    for (auto& d : seeded_points(seed_from(c), static_cast<std::size_t>(count), bits)) out.push_back(d.to_rational());
    return out;
}

}  // namespace orbitgauge
