#pragma once

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "complexity.hpp"
#include "config.hpp"
#include "cover.hpp"
#include "entropy.hpp"
#include "symbolic.hpp"
#include "systems.hpp"
#include "tracker.hpp"

namespace orbitgauge {

struct Table {
    std::string name;
    std::string header;
    std::vector<std::string> rows;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    std::string name;
    std::deque<Table> tables;  // table() hands out references that must survive later tables
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
    Table& table(const std::string& n, const std::string& header) {
        for (auto& t : tables)
            if (t.name == n) return t;
        tables.push_back({n, header, {}});
        return tables.back();
    }
    void check(std::string n, bool ok, std::string detail) { checks.push_back({std::move(n), ok, std::move(detail)}); }
};

inline std::string fmt(double v, int digits = 6) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) {
        if (c == '"') o += '"';
        o += c;
    }
    return o + "\"";
}

inline std::string join_fields(std::initializer_list<std::string> f) {
    std::string out;
    bool first = true;
    for (const auto& s : f) {
        if (!first) out += ',';
        out += csv_field(s);
        first = false;
    }
    return out;
}

inline std::string environment_fingerprint() {
    std::string s = "compiler=";
#ifdef __VERSION__
    s += __VERSION__;
#else
    s += "unknown";
#endif
    s += " gmp=" + std::string(gmp_version);
    s += " cplusplus=" + std::to_string(__cplusplus);
    s += " max_prec_bits=" + std::to_string(max_precision_bits());
    return s;
}

namespace detail {

inline std::string cover_label(const Cover& c) {
    const std::string pre = "ladder-j";
    if (c.id.rfind(pre, 0) == 0) return c.id.substr(pre.size());
    return c.id;
}

inline void add_profile_rows(Table& t, const InfoProfile& p, const std::string& cover_j) {
    for (const auto& c : p.checkpoints)
        t.rows.push_back(
            join_fields({std::to_string(c.n), fmt(c.bits_plain, 3), fmt(c.bits_conditional, 3), cover_j, p.policy}));
}

inline const char* kProfileHeader = "n,bits_plain,bits_conditional,cover_j,policy";
inline const char* kEntropyHeader = "epsilon,n,sep_count,net_count,join_count,log2_sep_over_f";

inline std::string rat(const Rational& q) { return q.get_str(); }

inline double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

inline std::vector<long> ladder_from(const Config& c, const std::string& key) { return parse_ladder(key, c.raw(key)); }

// Per-epsilon log2 counts from an entropy profile.
inline std::vector<std::vector<double>> log_counts(const EntropyProfile& p, std::size_t per_eps) {
    std::vector<std::vector<double>> out;
    for (std::size_t e = 0; e < p.epsilons.size(); ++e) {
        std::vector<double> v;
        for (std::size_t i = 0; i < per_eps; ++i)
            v.push_back(std::log2(static_cast<double>(std::max<long>(p.rows[e * per_eps + i].sep, 1))));
        out.push_back(std::move(v));
    }
    return out;
}

// h^f as the largest per-epsilon slope; a sublinear f meets a positive
// exponential rate, so the value is infinite there.
inline double entropy_for(const EntropyProfile& p, const std::vector<long>& ns, const ScalingFunction& f,
                          double h_identity, double positive = 0.05) {
    if (f.sublinear() && h_identity > positive) return std::numeric_limits<double>::infinity();
    double h = 0;
    for (const auto& v : log_counts(p, ns.size())) h = std::max(h, growth_rate(ns, v, f));
    return h;
}

inline void entropy_table(RunReport& r, const EntropyProfile& p, const ScalingFunction& f) {
    auto& t = r.table("entropy", kEntropyHeader);
    for (const auto& row : p.rows) {
        double l = std::log2(static_cast<double>(std::max<long>(row.sep, 1))) / f(static_cast<double>(row.n));
        t.rows.push_back(join_fields({rat(row.epsilon), std::to_string(row.n), std::to_string(row.sep),
                                      row.net > 0 ? std::to_string(row.net) : "",
                                      row.join ? std::to_string(*row.join) : "", fmt(l)}));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primitive runs behind the CLI subcommands.

inline RunReport run_orbit_complexity(const Config& cfg) {
    RunReport r;
    r.name = "orbit-complexity";
    SystemSpec sys = system_from(cfg);
    auto covers = covers_from(cfg, sys.space);
    auto cps = checkpoints_from(cfg);
    auto pts = points_from(cfg, sys.space, cps.back());
    auto fam = scaling_from(cfg);
    InfoMode mode = mode_from(cfg);
    CodingPolicy pol = policy_from(cfg);
    InfoEstimator est = estimator_from(cfg);
    auto& prof = r.table("profiles", detail::kProfileHeader);
    auto& ind = r.table("indicators", "point,f,cover_j,indicator,ratio");
    std::vector<double> rates;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (const auto& c : covers) {
            InfoProfile p = orbit_info_profile(sys, pts[i], c, cps, pol, est);
            if (i == 0) detail::add_profile_rows(prof, p, detail::cover_label(c));
            if (&c == &covers.back())
                rates.push_back(p.checkpoints.back().bits_plain / static_cast<double>(p.checkpoints.back().n));
            if (cps.size() < 4) continue;
            for (const auto& f : fam)
                ind.rows.push_back(join_fields({std::to_string(i), f.name(), detail::cover_label(c),
                                                fmt(complexity_indicator(p, f, mode)), fmt(ratio_indicator(p, f, mode))}));
        }
    }
    for (const auto& c : covers) r.tables.push_back({"cover-" + c.id, "", {serialize(c)}});
    double med = detail::median(rates);
    r.notes.push_back("median final plain rate " + fmt(med) + " bits/symbol over " + std::to_string(rates.size()) +
                      " points (finest cover)");
    if (!cfg.raw("check.rate_min").empty())
        r.check("rate >= " + cfg.raw("check.rate_min"), med >= cfg.get_double("check.rate_min"), "median " + fmt(med));
    if (!cfg.raw("check.rate_max").empty())
        r.check("rate <= " + cfg.raw("check.rate_max"), med <= cfg.get_double("check.rate_max"), "median " + fmt(med));
    return r;
}

namespace detail {

inline RunReport entropy_report(const Config& cfg, EntropyProfile* out) {
    RunReport r;
    r.name = "gen-entropy";
    SystemSpec sys = system_from(cfg);
    auto eps = eps_from(cfg);
    auto ns = ladder_from(cfg, "entropy.n");
    auto fam = scaling_from(cfg);
    EntropyOptions opt;
    opt.max_grid_bits = cfg.get_long("entropy.grid_bits_max");
    opt.nets = cfg.get_bool("entropy.nets");
    if (opt.max_grid_bits < 2 || opt.max_grid_bits > 24) throw ConfigError("entropy.grid_bits_max: out of range");
    for (long n : ns)
        if (n < 1) throw ConfigError("entropy.n: values must be positive");
    EntropyProfile p = gen_entropy(sys, ScalingFunction::identity(), eps, ns, opt);
    long jj = cfg.get_long("entropy.join_j");
    if (jj > 0) {
        Cover u = uniform_cover(sys.space, jj);
        long cap = cfg.get_long("entropy.join_n_max");
        for (auto& row : p.rows)
            if (row.n <= cap) row.join = cover_join_count(sys, u, row.n - 1);
    }
    entropy_table(r, p, fam.front());
    // counts are nondecreasing in n for each epsilon
    bool mono = true;
    for (std::size_t i = 1; i < p.rows.size(); ++i)
        if (p.rows[i].epsilon == p.rows[i - 1].epsilon && p.rows[i].n > p.rows[i - 1].n &&
            p.rows[i].sep < p.rows[i - 1].sep)
            mono = false;
    r.check("separated counts nondecreasing in n", mono, std::to_string(p.rows.size()) + " rows");
    auto& h = r.table("entropy_rates", "f,h");
    if (ns.size() >= 4) {
        double hid = entropy_for(p, ns, ScalingFunction::identity(), 0);
        for (const auto& f : fam) h.rows.push_back(join_fields({f.name(), fmt(entropy_for(p, ns, f, hid))}));
    }
    if (out) *out = std::move(p);
    return r;
}

}  // namespace detail

inline RunReport run_gen_entropy(const Config& cfg) { return detail::entropy_report(cfg, nullptr); }

inline RunReport run_track(const Config& cfg) {
    RunReport r;
    r.name = "track";
    SystemSpec sys = system_from(cfg);
    long k = cfg.get_long("track.k"), m = cfg.get_long("track.m");
    if (k < 0 || k > 1000000) throw ConfigError("track.k: out of range");
    if (m < 0 || m > 100000) throw ConfigError("track.m: out of range");
    auto pts = points_from(cfg, sys.space, 0);
    TrackedOrbit o = track(sys, pts.front(), k, m);
    auto& t = r.table("track", "k,center_hex,radius_exp");
    for (std::size_t i = 0; i < o.steps.size(); ++i)
        t.rows.push_back(join_fields({std::to_string(i), o.steps[i].center.to_hex(),
                                      o.steps[i].exact ? "exact" : std::to_string(o.steps[i].radius_exp)}));
    r.notes.push_back("tracked " + sys.describe() + " from " + pts.front().get_str() + " for " + std::to_string(k) +
                      " steps to 2^-" + std::to_string(m));
    return r;
}

inline long level_of_radius(const Rational& eps) {
    Dyadic d;
    if (!as_dyadic(eps, d) || d.mantissa() != 1 || d.exponent() >= 0)
        throw ConfigError("reconstruct.eps: must be a power 2^-j");
    return -d.exponent();
}

inline RunReport run_reconstruct(const Config& cfg) {
    RunReport r;
    r.name = "reconstruct-rotation";
    SystemSpec sys = system_from(cfg);
    if (sys.kind != MapKind::rotation) throw ConfigError("system.kind: reconstruction needs a rotation");
    long k = cfg.get_long("reconstruct.k");
    if (k < 1 || k > (1L << 22)) throw ConfigError("reconstruct.k: out of range");
    Rational eps = cfg.get_rational("reconstruct.eps");
    Cover cov = uniform_cover(Space::circle, level_of_radius(eps));
    SymbolicString sym = track_symbolic(sys, Rational(0), cov, k + 1);
    RotationEstimate est = reconstruct_rotation(sym, cov);
    Rational err = abs(est.q - sys.r.to_rational());
    Rational bound = 2 * eps / k;
    long digits = recovered_digits(sys.r.to_rational(), est.q);
    auto& t = r.table("reconstruction", "r_hex,q,width,error,bound,digits");
    t.rows.push_back(join_fields({sys.r.to_hex(), est.q.get_str(), fmt(est.width.get_d(), 12), fmt(Rational(err).get_d(), 12),
                                  fmt(bound.get_d(), 12), std::to_string(digits)}));
    r.check("|r-q| <= 2 eps/k", err <= bound, "error " + fmt(Rational(err).get_d(), 12));
    return r;
}

// ---------------------------------------------------------------------------
// Experiments.

inline RunReport run_periodic(const Config& cfg) {
    RunReport r;
    r.name = "periodic";
    auto cps = checkpoints_from(cfg);
    InfoEstimator est = estimator_from(cfg);
    struct Case {
        std::string label;
        SystemSpec sys;
        Rational x0;
    };
    std::vector<Case> cases = {
        {"rotation r=1/4 x=0", SystemSpec::rotation(Dyadic(1, -2)), Rational(0)},
        {"rotation r=3/8 x=1/16", SystemSpec::rotation(Dyadic(3, -3)), Rational(1, 16)},
        {"doubling x=1/3", SystemSpec::doubling(), Rational(1, 3)},
        {"doubling x=3/10", SystemSpec::doubling(), Rational(3, 10)},
        {"doubling x=1/8", SystemSpec::doubling(), Rational(1, 8)},
        {"tent x=2/3", SystemSpec::tent(), Rational(2, 3)},
        {"tent x=2/5", SystemSpec::tent(), Rational(2, 5)},
        {"logistic lambda=4 x=1/2", SystemSpec::logistic(Dyadic(4)), Rational(1, 2)},
        {"logistic lambda=2 x=1/2", SystemSpec::logistic(Dyadic(2)), Rational(1, 2)},
        {"manneville z=3 x=3/4", SystemSpec::manneville(3, Dyadic(1, -1)), Rational(3, 4)},
    };
    auto& t = r.table("periodic", "config,cover_j,rate,ratio_log2_first,ratio_log2_last,decreasing");
    auto& prof = r.table("profiles", detail::kProfileHeader);
    bool all_rate = true, all_dec = true;
    double worst = 0;
    for (const auto& c : cases) {
        for (const auto& cov : covers_from(cfg, c.sys.space)) {
            InfoProfile p = orbit_info_profile(c.sys, c.x0, cov, cps, policy_from(cfg), est);
            detail::add_profile_rows(prof, p, detail::cover_label(cov));
            const auto& last = p.checkpoints.back();
            double rate = last.bits_conditional / static_cast<double>(last.n);
            std::vector<double> ratios;
            for (const auto& cp : p.checkpoints)
                ratios.push_back(cp.bits_conditional / std::log2(static_cast<double>(cp.n)));
            bool dec = ratios.back() < ratios.front();
            for (std::size_t i = 1; i < ratios.size(); ++i)
                if (ratios[i] > ratios[i - 1] + 1e-9) dec = false;
            worst = std::max(worst, rate);
            all_rate = all_rate && rate < 0.25;
            all_dec = all_dec && dec;
            t.rows.push_back(join_fields({c.label, detail::cover_label(cov), fmt(rate), fmt(ratios.front()),
                                          fmt(ratios.back()), dec ? "yes" : "no"}));
        }
    }
    r.check("conditional rate < 0.25 at n=" + std::to_string(cps.back()), all_rate, "worst " + fmt(worst));
    r.check("log2 indicator decreases along checkpoints", all_dec, std::to_string(cases.size()) + " configurations");
    return r;
}

inline RunReport run_brudno(const Config& cfg) {
    RunReport r;
    r.name = "brudno";
    SystemSpec sys = system_from(cfg);
    auto covers = covers_from(cfg, sys.space);
    auto cps = checkpoints_from(cfg);
    auto pts = points_from(cfg, sys.space, cps.back());
    auto& prof = r.table("profiles", detail::kProfileHeader);
    auto& t = r.table("points", "point,n,bits_plain,rate");
    std::vector<double> rates;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        InfoProfile p = orbit_info_profile(sys, pts[i], covers.back(), cps, policy_from(cfg), estimator_from(cfg));
        if (i == 0) detail::add_profile_rows(prof, p, detail::cover_label(covers.back()));
        double rate = p.checkpoints.back().bits_plain / static_cast<double>(cps.back());
        rates.push_back(rate);
        t.rows.push_back(join_fields({std::to_string(i), std::to_string(cps.back()),
                                      fmt(p.checkpoints.back().bits_plain, 1), fmt(rate)}));
    }
    double med = detail::median(rates);
    r.check("median plain rate in [0.8, 1.1]", med >= 0.8 && med <= 1.1,
            "median " + fmt(med) + " over " + std::to_string(rates.size()) + " points at n=" + std::to_string(cps.back()));
    return r;
}

inline RunReport run_doubling_entropy(const Config& cfg) {
    EntropyProfile p;
    RunReport r = detail::entropy_report(cfg, &p);
    r.name = "doubling-entropy";
    auto ns = detail::ladder_from(cfg, "entropy.n");
    // slope at the smallest epsilon
    std::vector<double> lg = detail::log_counts(p, ns.size()).back();
    double h = growth_rate(ns, lg, ScalingFunction::identity());
    r.check("h estimate (f=identity) in [0.8, 1.1]", h >= 0.8 && h <= 1.1,
            "h=" + fmt(h) + " at eps=" + p.epsilons.back().get_str() + ", n<=" + std::to_string(ns.back()));
    return r;
}

inline Dyadic seeded_rotation(const Config& cfg, long bits) {
    if (!cfg.raw("system.r_bits").empty() || !cfg.raw("system.r").empty()) {
        Config c = cfg;
        c.set("system.kind", "rotation");
        return system_from(c).r;
    }
    return seeded_points(seed_from(cfg) ^ 0x5eedULL, 1, bits).front();
}

inline RunReport run_isometry(const Config& cfg) {
    RunReport r;
    r.name = "isometry";
    SystemSpec sys = SystemSpec::rotation(seeded_rotation(cfg, 32));
    auto eps = eps_from(cfg);
    auto ns = detail::ladder_from(cfg, "entropy.n");
    EntropyOptions opt;
    opt.nets = cfg.get_bool("entropy.nets");
    opt.max_grid_bits = cfg.get_long("entropy.grid_bits_max");
    EntropyProfile p = gen_entropy(sys, ScalingFunction::identity(), eps, ns, opt);
    detail::entropy_table(r, p, ScalingFunction::identity());
    bool flat = true;
    long amb = 0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        amb += p.rows[i].ambiguous;
        if (i > 0 && p.rows[i].epsilon == p.rows[i - 1].epsilon && p.rows[i].sep != p.rows[i - 1].sep) flat = false;
    }
    r.notes.push_back(sys.describe());
    r.check("separated counts constant in n", flat && amb == 0,
            "n=" + std::to_string(ns.front()) + ".." + std::to_string(ns.back()) + ", ambiguous " + std::to_string(amb));
    auto& h = r.table("entropy_rates", "f,h");
    bool zero = true;
    for (const auto& f : default_scaling_family()) {
        double v = detail::entropy_for(p, ns, f, 0);
        h.rows.push_back(join_fields({f.name(), fmt(v)}));
        zero = zero && v == 0.0;
    }
    r.check("h^f = 0 for every f in the family", zero, std::to_string(default_scaling_family().size()) + " functions");
    return r;
}

inline RunReport run_sandwich(const Config& cfg) {
    RunReport r;
    r.name = "sandwich";
    SystemSpec sys = system_from(cfg);
    auto covers = covers_from(cfg, sys.space);
    covers.push_back(binary_cover(sys.space));
    auto eps = eps_from(cfg);
    auto ns = detail::ladder_from(cfg, "entropy.n");
    long n_max = *std::max_element(ns.begin(), ns.end());
    if (n_max > 8) throw ConfigError("entropy.n: sandwich instances need n <= 8");
    SandwichReport s = sandwich_check(sys, covers, n_max, eps);
    auto& t = r.table("sandwich", "check,n,epsilon,lhs,rhs,ok");
    for (const auto& f : s.findings)
        t.rows.push_back(join_fields({f.check, std::to_string(f.n), f.epsilon.get_str(), std::to_string(f.lhs),
                                      std::to_string(f.rhs), f.ok ? "yes" : "no"}));
    r.notes.push_back(sys.describe() + (bowen_balls_connected(sys) ? "" : ": join upper bound not applicable"));
    r.check("sandwich inequalities hold", s.violations == 0,
            std::to_string(s.violations) + " violations in " + std::to_string(s.findings.size()) + " checks");
    return r;
}

inline RunReport run_tracker(const Config& cfg) {
    RunReport r;
    r.name = "tracker";
    long cases = cfg.get_long("orbit.points");
    long kmax = cfg.get_long("track.k"), mmax = cfg.get_long("track.m");
    if (cases < 1 || kmax < 1 || mmax < 1) throw ConfigError("tracker: orbit.points, track.k, track.m must be positive");
    std::mt19937_64 rng(seed_from(cfg));
    auto& t = r.table("cases", "case,system,x0,k,m,final_error_log2,ok");
    long bad = 0;
    for (long c = 0; c < cases; ++c) {
        SystemSpec sys;
        long klim = kmax;
        switch (c % 4) {
            case 0: sys = SystemSpec::rotation(Dyadic(mpz_class(static_cast<unsigned long>(rng() >> 32)), -32)); break;
            case 1: sys = SystemSpec::doubling(); break;
            case 2: sys = SystemSpec::tent(); break;
            default:
                sys = SystemSpec::logistic(Dyadic(15, -2));
                klim = std::min<long>(kmax, 10);
                break;
        }
        long q = 3 + 2 * static_cast<long>(rng() % (1u << 19));
        long p = 1 + static_cast<long>(rng() % static_cast<unsigned long>(q - 1));
        Rational x0(p, q);
        x0.canonicalize();
        long k = 1 + static_cast<long>(rng() % static_cast<unsigned long>(klim));
        long m = 1 + static_cast<long>(rng() % static_cast<unsigned long>(mmax));
        TrackedOrbit o = track(sys, x0, k, m);
        Rational x = x0;
        bool ok = o.steps.size() == static_cast<std::size_t>(k + 1);
        Rational final_err = 0;
        for (long i = 0; i <= k && ok; ++i) {
            if (i > 0) x = step_exact(sys, x);
            const auto& st = o.steps[static_cast<std::size_t>(i)];
            Rational d = distance(sys.space, x, st.center.to_rational());
            if (st.exact)
                ok = d == 0;
            else
                ok = d < Dyadic::pow2(-st.radius_exp).to_rational();
            if (i == k) {
                final_err = d;
                ok = ok && d <= Dyadic::pow2(-m).to_rational();
            }
        }
        if (!ok) ++bad;
        double l = final_err == 0 ? -std::numeric_limits<double>::infinity() : std::log2(final_err.get_d());
        t.rows.push_back(join_fields({std::to_string(c), sys.describe(), x0.get_str(), std::to_string(k),
                                      std::to_string(m), fmt(l, 3), ok ? "yes" : "no"}));
    }
    r.check("oracle inside every enclosure and final error <= 2^-m", bad == 0,
            std::to_string(cases - bad) + "/" + std::to_string(cases) + " cases");
    return r;
}

inline RunReport run_rotation_reconstruction(const Config& cfg) {
    RunReport r;
    r.name = "rotation-reconstruction";
    long k = cfg.get_long("reconstruct.k");
    long trials = cfg.get_long("reconstruct.trials");
    if (k < 2 || k > (1L << 20)) throw ConfigError("reconstruct.k: out of range");
    if (trials < 1 || trials > 100000) throw ConfigError("reconstruct.trials: out of range");
    Rational eps = cfg.get_rational("reconstruct.eps");
    Cover cov = uniform_cover(Space::circle, level_of_radius(eps));
    auto rs = seeded_points(seed_from(cfg), static_cast<std::size_t>(trials), 64);
    auto& t = r.table("trials", "trial,r_hex,q,width,error_over_bound,digits,ok");
    long bad = 0, few = 0;
    long min_digits = std::numeric_limits<long>::max();
    double ratio_sum = 0;
    long ratio_count = 0;
    const double logk = std::log2(static_cast<double>(k));
    for (long i = 0; i < trials; ++i) {
        SystemSpec sys = SystemSpec::rotation(rs[static_cast<std::size_t>(i)]);
        Rational rv = sys.r.to_rational();
        SymbolicString sym = track_symbolic(sys, Rational(0), cov, k + 1);
        RotationEstimate e = reconstruct_rotation(sym, cov);
        Rational err = abs(e.q - rv);
        Rational bound = 2 * eps / k;
        long d = recovered_digits(rv, e.q);
        bool ok = err <= bound && e.width <= 2 * bound;
        bool dig = static_cast<double>(d) >= logk - 8;
        if (!ok) ++bad;
        if (!dig) ++few;
        min_digits = std::min(min_digits, d);
        if (i < 8) {
            SymbolicString s2 = track_symbolic(sys, Rational(0), cov, 2 * k + 1);
            RotationEstimate e2 = reconstruct_rotation(s2, cov);
            ratio_sum += Rational(e2.width / e.width).get_d();
            ++ratio_count;
        }
        t.rows.push_back(join_fields({std::to_string(i), sys.r.to_hex(), e.q.get_str(), fmt(e.width.get_d(), 12),
                                      fmt(Rational(err / bound).get_d()), std::to_string(d), ok && dig ? "yes" : "no"}));
    }
    r.check("|r-q| <= 2 eps/k in every trial", bad == 0, std::to_string(trials - bad) + "/" + std::to_string(trials));
    r.check("recovered digits >= log2 k - 8", few == 0,
            "minimum " + std::to_string(min_digits) + ", need " + fmt(logk - 8, 1));
    r.notes.push_back("mean width ratio when k doubles: " + fmt(ratio_sum / static_cast<double>(ratio_count)));

    // entropy side: rotation by the first number, truncated so grid sums stay exact in doubles
    Dyadic r40 = rs.front().floor_to(40);
    SystemSpec rot = SystemSpec::rotation(r40);
    auto ns = detail::ladder_from(cfg, "entropy.n");
    EntropyOptions opt;
    opt.nets = false;
    opt.max_grid_bits = cfg.get_long("entropy.grid_bits_max");
    EntropyProfile p = gen_entropy(rot, ScalingFunction::identity(), eps_from(cfg), ns, opt);
    detail::entropy_table(r, p, ScalingFunction::identity());
    bool flat = true;
    for (std::size_t i = 1; i < p.rows.size(); ++i)
        if (p.rows[i].epsilon == p.rows[i - 1].epsilon && p.rows[i].sep != p.rows[i - 1].sep) flat = false;
    r.check("separated counts flat in n", flat, rot.describe());

    // complexity side: conditional information against log2 n
    std::vector<long> cps;
    for (long n = 16; n <= k; n *= 2) cps.push_back(n);
    auto& prof = r.table("profiles", detail::kProfileHeader);
    double slope_sum = 0;
    long used = std::min<long>(trials, 8);
    for (long i = 0; i < used; ++i) {
        SystemSpec sys = SystemSpec::rotation(rs[static_cast<std::size_t>(i)]);
        InfoProfile pr = orbit_info_profile(sys, Rational(0), cov, cps, CodingPolicy::canonical(), estimator_from(cfg));
        if (i == 0) detail::add_profile_rows(prof, pr, detail::cover_label(cov));
        std::vector<double> x, y;
        for (const auto& c : pr.checkpoints) {
            x.push_back(std::log2(static_cast<double>(c.n)));
            y.push_back(c.bits_conditional);
        }
        slope_sum += detail::ls_slope(x, y);
    }
    double c = slope_sum / static_cast<double>(used);
    r.check("conditional information grows like c log2 n with c > 0", c > 0, "c=" + fmt(c));
    return r;
}

inline RunReport run_local_vs_global(const Config& cfg) {
    RunReport r;
    r.name = "local-vs-global";
    SystemSpec sys = system_from(cfg);
    auto covers = covers_from(cfg, sys.space);
    auto cps = checkpoints_from(cfg);
    auto pts = points_from(cfg, sys.space, cps.back());
    auto fam = scaling_from(cfg);
    double slack = cfg.get_double("experiment.slack");
    InfoMode mode = mode_from(cfg);
    auto ns = detail::ladder_from(cfg, "entropy.n");
    EntropyOptions opt;
    opt.nets = false;
    opt.max_grid_bits = cfg.get_long("entropy.grid_bits_max");
    EntropyProfile ep = gen_entropy(sys, ScalingFunction::identity(), eps_from(cfg), ns, opt);
    detail::entropy_table(r, ep, ScalingFunction::identity());
    double hid = detail::entropy_for(ep, ns, ScalingFunction::identity(), 0);
    std::vector<double> hf;
    auto& ht = r.table("entropy_rates", "f,h");
    for (const auto& f : fam) {
        hf.push_back(detail::entropy_for(ep, ns, f, hid));
        ht.rows.push_back(join_fields({f.name(), fmt(hf.back())}));
    }
    auto& t = r.table("local_vs_global", "point,f,K_hat,witness_cover_j,h_f,ok");
    auto& prof = r.table("profiles", detail::kProfileHeader);
    long bad = 0, total = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<InfoProfile> ps;
        for (const auto& c : covers) {
            ps.push_back(orbit_info_profile(sys, pts[i], c, cps, policy_from(cfg), estimator_from(cfg)));
            if (i == 0) detail::add_profile_rows(prof, ps.back(), detail::cover_label(c));
        }
        for (std::size_t fi = 0; fi < fam.size(); ++fi) {
            double best = 0;
            std::size_t w = 0;
            for (std::size_t ci = 0; ci < ps.size(); ++ci) {
                double v = complexity_indicator(ps[ci], fam[fi], mode);
                if (ci == 0 || v > best) {
                    best = v;
                    w = ci;
                }
            }
            bool ok = best <= hf[fi] + slack;
            ++total;
            if (!ok) ++bad;
            worst = std::max(worst, best - hf[fi]);
            t.rows.push_back(join_fields({std::to_string(i), fam[fi].name(), fmt(best), detail::cover_label(covers[w]),
                                          fmt(hf[fi]), ok ? "yes" : "no"}));
        }
    }
    r.notes.push_back(sys.describe() + ": h^identity=" + fmt(hid));
    r.check("K_hat^f <= h^f + " + fmt(slack, 2) + " [" + sys.describe() + "]", bad == 0,
            std::to_string(total - bad) + "/" + std::to_string(total) + " pairs, largest K_hat - h = " + fmt(worst));
    return r;
}

inline RunReport run_manneville_scan(const Config& cfg) {
    RunReport r;
    r.name = "manneville-scan";
    std::vector<Rational> zs;
    for (const auto& s : cfg.get_list("experiment.z_list")) {
        try {
            zs.push_back(parse_rational(s));
        } catch (const Error& e) {
            throw ConfigError(std::string("experiment.z_list: ") + e.what());
        }
    }
    if (zs.empty()) throw ConfigError("experiment.z_list: empty");
    Dyadic a;
    if (!as_dyadic(cfg.get_rational("system.a"), a)) throw ConfigError("system.a: must be dyadic");
    auto cps = checkpoints_from(cfg);
    Config pc = cfg;
    pc.set("orbit.x0", "seeded");
    auto& t = r.table("exponents", "z,alpha,r2,candidate_prose,candidate_display,points");
    auto& prof = r.table("profiles", detail::kProfileHeader);
    std::vector<double> alphas;
    for (const auto& z : zs) {
        SystemSpec sys;
        try {
            sys = SystemSpec::manneville(z, a);
        } catch (const Error& e) {
            throw ConfigError(std::string("experiment.z_list: ") + e.what());
        }
        auto covers = covers_from(cfg, sys.space);
        auto pts = points_from(pc, sys.space, cps.back());
        std::vector<InfoProfile> ps;
        for (const auto& x : pts)
            ps.push_back(orbit_info_profile(sys, x, covers.front(), cps, policy_from(cfg), estimator_from(cfg)));
        InfoProfile avg = average_profiles(ps);
        detail::add_profile_rows(prof, avg, detail::cover_label(covers.front()));
        GrowthFit g = fit_growth_exponent(avg, InfoMode::conditional);
        alphas.push_back(g.alpha);
        double zd = z.get_d();
        t.rows.push_back(join_fields({z.get_str(), fmt(g.alpha), fmt(g.r2), fmt(1 / (zd - 1)), fmt(zd / (zd - 1)),
                                      std::to_string(pts.size())}));
        r.notes.push_back("z=" + z.get_str() + ": fitted exponent " + fmt(g.alpha) + " (R^2 " + fmt(g.r2, 3) +
                          "); candidates 1/(z-1)=" + fmt(1 / (zd - 1)) + ", z/(z-1)=" + fmt(zd / (zd - 1)));
    }
    for (std::size_t i = 0; i < zs.size(); ++i)
        if (zs[i] == 3)
            r.check("alpha(z=3) in (0.3, 0.7)", alphas[i] > 0.3 && alphas[i] < 0.7, "alpha=" + fmt(alphas[i]));
    bool dec = true, sub = true;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        sub = sub && alphas[i] < 1;
        for (std::size_t j = 0; j < zs.size(); ++j)
            if (zs[i] < zs[j] && !(alphas[i] > alphas[j])) dec = false;
    }
    if (zs.size() > 1) r.check("exponent decreases as z grows (paired seeds)", dec, "");
    r.check("all exponents < 1", sub, "");
    return r;
}

// Smallest power-of-two period of the second half of a coding, or 0.
inline long tail_period(const SymbolicString& s, long max_period = 1024) {
    std::size_t half = s.size() / 2;
    for (long p = 1; p <= max_period; p *= 2) {
        bool ok = true;
        for (std::size_t i = half; i + static_cast<std::size_t>(p) < s.size() && ok; ++i)
            ok = s.symbols[i] == s.symbols[i + static_cast<std::size_t>(p)];
        if (ok) return p;
    }
    return 0;
}

inline RunReport run_feigenbaum(const Config& cfg) {
    RunReport r;
    r.name = "feigenbaum";
    SystemSpec sys = system_from(cfg);
    if (sys.kind != MapKind::logistic) throw ConfigError("system.kind: the Feigenbaum experiment needs the logistic map");
    auto covers = covers_from(cfg, sys.space);
    auto cps = checkpoints_from(cfg);
    auto pts = points_from(cfg, sys.space, cps.back());
    auto& t = r.table("indicators", "point,indicator_identity,witness_cover_j,coarse_period");
    auto& prof = r.table("profiles", detail::kProfileHeader);
    double worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = 0;
        std::size_t w = 0;
        for (std::size_t ci = 0; ci < covers.size(); ++ci) {
            InfoProfile p = orbit_info_profile(sys, pts[i], covers[ci], cps, policy_from(cfg), estimator_from(cfg));
            if (i == 0) detail::add_profile_rows(prof, p, detail::cover_label(covers[ci]));
            double v = complexity_indicator(p, ScalingFunction::identity(), InfoMode::conditional);
            if (ci == 0 || v > best) {
                best = v;
                w = ci;
            }
        }
        SymbolicString coarse = symbolic_orbit(sys, pts[i], uniform_cover(sys.space, 3), cps.back());
        worst = std::max(worst, best);
        t.rows.push_back(join_fields({std::to_string(i), fmt(best), detail::cover_label(covers[w]),
                                      std::to_string(tail_period(coarse))}));
    }
    r.check("f=identity indicator < 0.1 at n=" + std::to_string(cps.back()), worst < 0.1,
            "largest " + fmt(worst) + " over " + std::to_string(pts.size()) + " points");
    Rational eps(1, 64);
    std::vector<Rational> etas = {Rational(1, 1 << 10), Rational(1, 1 << 16), Rational(1, 1 << 24)};
    EquicontinuityWitness wv = equicontinuity_probe(sys, eps, etas, 512);
    auto& wt = r.table("equicontinuity", "found,x_hex,y_hex,eta,k,distance_lower");
    wt.rows.push_back(join_fields({wv.found ? "yes" : "no", wv.found ? wv.x.to_hex() : "", wv.found ? wv.y.to_hex() : "",
                                   wv.found ? wv.eta.get_str() : "", std::to_string(wv.k), fmt(wv.distance_lower)}));
    r.check("equicontinuity probe finds a witness", wv.found,
            wv.found ? "pair " + wv.x.to_hex() + ", " + wv.y.to_hex() + " separates beyond 1/64 at step " +
                           std::to_string(wv.k)
                     : "none");
    return r;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> n = {"periodic",  "brudno",  "doubling-entropy",        "isometry",
                                               "sandwich",  "tracker", "rotation-reconstruction", "local-vs-global",
                                               "manneville-scan", "feigenbaum"};
    return n;
}

// Settings an experiment starts from before the config file and --set.
inline std::vector<std::pair<std::string, std::string>> experiment_preset(const std::string& name) {
    if (name == "periodic") return {{"cover.j_min", "3"}, {"cover.j_max", "3"}, {"orbit.checkpoints", "pow2:6..12"}};
    if (name == "brudno")
        return {{"system.kind", "doubling"}, {"cover.kind", "binary-nice"}, {"orbit.policy", "nice"},
                {"orbit.points", "32"},      {"orbit.point_bits", "0"},     {"orbit.checkpoints", "pow2:12..16"}};
    if (name == "doubling-entropy")
        return {{"system.kind", "doubling"}, {"entropy.eps", "1/32"}, {"entropy.n", "2..14"}, {"entropy.nets", "false"},
                {"complexity.f", "identity"}};
    if (name == "isometry") return {{"entropy.eps", "1/8,1/32"}, {"entropy.n", "2..64"}, {"entropy.grid_bits_max", "10"}};
    if (name == "sandwich")
        return {{"entropy.eps", "1/8,3/16,1/4"}, {"entropy.n", "1..6"}, {"cover.j_min", "3"}, {"cover.j_max", "4"}};
    if (name == "tracker") return {{"orbit.points", "50"}, {"track.k", "1000"}, {"track.m", "40"}};
    if (name == "rotation-reconstruction")
        return {{"reconstruct.k", "4096"}, {"reconstruct.eps", "1/64"}, {"reconstruct.trials", "100"},
                {"entropy.eps", "1/8,1/32"}, {"entropy.n", "2..16"}, {"entropy.grid_bits_max", "10"}};
    if (name == "local-vs-global")
        return {{"cover.j_min", "2"},          {"cover.j_max", "4"},   {"orbit.checkpoints", "pow2:8..14"},
                {"orbit.points", "8"},         {"orbit.point_bits", "0"}, {"entropy.eps", "1/16"},
                {"entropy.n", "2..12"},        {"entropy.grid_bits_max", "20"}};
    if (name == "manneville-scan")
        return {{"cover.j_min", "3"}, {"cover.j_max", "3"}, {"orbit.points", "64"}, {"orbit.checkpoints", "pow2:6..14"}};
    if (name == "feigenbaum")
        return {{"system.kind", "logistic"}, {"system.lambda", "feigenbaum"}, {"cover.j_min", "2"}, {"cover.j_max", "4"},
                {"orbit.points", "8"},       {"orbit.checkpoints", "pow2:8..14"}};
    throw ConfigError("experiment.name: unknown experiment '" + name + "'");
}

inline RunReport run_experiment(const Config& cfg) {
    const std::string& n = cfg.raw("experiment.name");
    if (n == "periodic") return run_periodic(cfg);
    if (n == "brudno") return run_brudno(cfg);
    if (n == "doubling-entropy") return run_doubling_entropy(cfg);
    if (n == "isometry") return run_isometry(cfg);
    if (n == "sandwich") return run_sandwich(cfg);
    if (n == "tracker") return run_tracker(cfg);
    if (n == "rotation-reconstruction") return run_rotation_reconstruction(cfg);
    if (n == "local-vs-global") return run_local_vs_global(cfg);
    if (n == "manneville-scan") return run_manneville_scan(cfg);
    if (n == "feigenbaum") return run_feigenbaum(cfg);
    throw ConfigError("experiment.name: unknown experiment '" + n + "'");
}

// ---------------------------------------------------------------------------
// Artifacts.

inline std::string summary_text(const RunReport& r) {
    std::string s = "run " + r.name + "\n";
    for (const auto& c : r.checks)
        s += std::string(c.pass ? "PASS " : "FAIL ") + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "\n";
    for (const auto& n : r.notes) s += "note " + n + "\n";
    return s;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

inline void write_report(const RunReport& r, const std::filesystem::path& dir, const Config& cfg) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.txt", cfg.resolved());
    for (const auto& t : r.tables) {
        std::string body;
        if (!t.header.empty()) body += t.header + "\n";
        for (const auto& row : t.rows) body += row + (row.empty() || row.back() != '\n' ? "\n" : "");
        bool is_cover = t.name.rfind("cover-", 0) == 0;
        write_text(dir / (t.name + (is_cover ? ".txt" : ".csv")), body);
    }
    std::string checks = "check,pass,detail\n";
    for (const auto& c : r.checks) checks += join_fields({c.name, c.pass ? "PASS" : "FAIL", c.detail}) + "\n";
    write_text(dir / "checks.csv", checks);
    write_text(dir / "summary.txt", summary_text(r) + "environment " + environment_fingerprint() + "\n");
}

inline std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& command,
                                           const Config& cfg) {
    return out / (command + "-" + cfg.hash_hex());
}

struct Aggregate {
    std::vector<std::string> lines;
    long runs = 0;
    long failures = 0;
};

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Collects checks.csv files below dir, sorted by path.
inline Aggregate aggregate_reports(const std::filesystem::path& dir) {
    Aggregate a;
    if (!std::filesystem::is_directory(dir)) return a;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() == "checks.csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        ++a.runs;
        std::ifstream in(f);
        std::string line;
        std::getline(in, line);
        std::string run = std::filesystem::relative(f.parent_path(), dir).string();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() < 2) continue;
            bool pass = fields[1] == "PASS";
            if (!pass) ++a.failures;
            a.lines.push_back(std::string(pass ? "PASS " : "FAIL ") + run + " " + fields[0] +
                              (fields.size() > 2 && !fields[2].empty() ? ": " + fields[2] : ""));
        }
    }
    return a;
}

}  // namespace orbitgauge
