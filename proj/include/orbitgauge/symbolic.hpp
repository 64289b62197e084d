#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cover.hpp"
#include "orbit.hpp"

namespace orbitgauge {

struct SymbolicString {
    std::vector<std::uint32_t> symbols;
    std::uint32_t alphabet = 2;
    std::string cover_id;
    std::string policy;

    std::size_t size() const { return symbols.size(); }
    SymbolicString prefix(std::size_t n) const {
        SymbolicString s = *this;
        s.symbols.resize(std::min(n, symbols.size()));
        return s;
    }
};

enum class PolicyKind { canonical, nice, beam };

struct CodingPolicy {
    PolicyKind kind = PolicyKind::canonical;
    int beam_width = 8;

    static CodingPolicy canonical() { return {}; }
    static CodingPolicy nice() { return {PolicyKind::nice, 8}; }
    static CodingPolicy beam(int w = 8) { return {PolicyKind::beam, w}; }
    std::string name() const {
        switch (kind) {
            case PolicyKind::canonical: return "canonical";
            case PolicyKind::nice: return "nice";
            case PolicyKind::beam: return "beam" + std::to_string(beam_width);
        }
        return "?";
    }
};

enum class Membership { in, out, unknown };

// Certified ball membership tests for orbit enclosures.
class CoverIndex {
public:
    explicit CoverIndex(const Cover& c) : space_(c.space), alphabet_(static_cast<std::uint32_t>(c.size())) {
        if (c.balls.empty()) throw InvalidCover("empty cover");
        for (const auto& b : c.balls) {
            full_.push_back(geom(b, 1));
            half_.push_back(geom(b, 2));
            centres_.push_back(b.center.get_d());
            rmax_ = std::max(rmax_, b.radius.get_d());
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (full_[i].whole)
                always_.push_back(i);
            else
                sorted_.push_back({centres_[i], i});
        }
        std::sort(sorted_.begin(), sorted_.end());
    }

    std::uint32_t alphabet() const { return alphabet_; }

    // Lowest index ball certified to contain the point; -1 when no ball is
    // certified yet, -2 when the point is certainly outside every ball.
    long canonical(const EnclosureView& v) const { return first(v, full_); }

    // Lowest index whose half-radius ball certifiably contains the point,
    // else canonical.
    long nice(const EnclosureView& v) const {
        long h = first(v, half_);
        return h >= 0 ? h : canonical(v);
    }

    // Every ball certified to contain the point.
    std::vector<std::uint32_t> all_in(const EnclosureView& v) const {
        std::vector<std::size_t> cand = candidates(v);
        std::vector<std::uint32_t> out;
        for (auto i : cand)
            if (state(full_[i], v) == Membership::in) out.push_back(static_cast<std::uint32_t>(i));
        return out;
    }

    Membership member(std::size_t i, const EnclosureView& v, bool half = false) const {
        return state(half ? half_[i] : full_[i], v);
    }

private:
    struct Geom {
        bool whole = false;
        Rational lo, hi;            // ambient (lifted) bounds
        double lo_dn[3], lo_up[3];  // shifted by t = -1, 0, 1
        double hi_dn[3], hi_up[3];
    };

    Geom geom(const Ball& b, int div) const {
        Geom g;
        Ball bb{b.center, b.radius / div};
        Arc a = to_arc(space_, bb);
        g.whole = a.full;
        g.lo = a.lo;
        g.hi = a.hi;
        for (int t = -1; t <= 1; ++t) {
            Rational l = a.lo + t, h = a.hi + t;
            g.lo_dn[t + 1] = floor_to(l, 80).to_double_down();
            g.lo_up[t + 1] = ceil_to(l, 80).to_double_up();
            g.hi_dn[t + 1] = floor_to(h, 80).to_double_down();
            g.hi_up[t + 1] = ceil_to(h, 80).to_double_up();
        }
        return g;
    }

    static int cmp_end(const EnclosureView& v, bool upper, const Rational& q) {
        if (v.q) {
            int c = ::cmp(*v.q, q);
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        }
        return cmp(upper ? *v.hi : *v.lo, q);
    }

    Membership state(const Geom& g, const EnclosureView& v) const {
        if (g.whole) return Membership::in;
        int t0 = space_ == Space::circle ? -1 : 0, t1 = space_ == Space::circle ? 1 : 0;
        bool maybe = false;
        for (int t = t0; t <= t1; ++t) {
            int k = t + 1;
            if (g.lo_up[k] < v.lo_dn && v.hi_up < g.hi_dn[k]) return Membership::in;
            if (v.hi_up <= g.lo_dn[k] || v.lo_dn >= g.hi_up[k]) continue;  // disjoint for this shift
            // floating point cannot decide; compare exactly
            Rational lo = g.lo + t, hi = g.hi + t;
            bool in = cmp_end(v, false, lo) > 0 && cmp_end(v, true, hi) < 0;
            if (in) return Membership::in;
            bool apart = cmp_end(v, true, lo) <= 0 || cmp_end(v, false, hi) >= 0;
            if (!apart) maybe = true;
        }
        return maybe ? Membership::unknown : Membership::out;
    }

    std::vector<std::size_t> candidates(const EnclosureView& v) const {
        std::vector<std::size_t> out = always_;
        double w = rmax_ + 1e-9;
        double lo = v.lo_dn - w, hi = v.hi_up + w;
        if (space_ == Space::circle && (hi - lo >= 1 || w >= 0.5)) {
            for (const auto& s : sorted_) out.push_back(s.second);
        } else {
            auto scan = [&](double a, double b) {
                auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(a, std::size_t{0}));
                for (; it != sorted_.end() && it->first <= b; ++it) out.push_back(it->second);
            };
            scan(lo, hi);
            if (space_ == Space::circle) {
                if (lo < 0) scan(lo + 1, 2);
                if (hi > 1) scan(-1, hi - 1);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    long first(const EnclosureView& v, const std::vector<Geom>& gs) const {
        bool unsure = false;
        for (auto i : candidates(v)) {
            Membership m = state(gs[i], v);
            if (m == Membership::in) return static_cast<long>(i);
            if (m == Membership::unknown) unsure = true;
        }
        return unsure ? -1 : -2;
    }

    Space space_;
    std::uint32_t alphabet_;
    std::vector<Geom> full_, half_;
    std::vector<double> centres_;
    std::vector<std::size_t> always_;
    std::vector<std::pair<double, std::size_t>> sorted_;
    double rmax_ = 0;
};

namespace detail {

// Adaptive order-1 code length, used to rank beam candidates.
struct Order1Cost {
    std::map<std::uint64_t, std::uint32_t> pairs;
    std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> ctx;  // total, distinct
    double bits = 0;
    std::uint32_t prev = 0xffffffffu;

    double cost(std::uint32_t s, std::uint32_t alphabet) const {
        auto cit = ctx.find(prev);
        if (cit == ctx.end()) return std::log2(static_cast<double>(alphabet));
        auto [n, d] = cit->second;
        auto pit = pairs.find((static_cast<std::uint64_t>(prev) << 32) | s);
        if (pit != pairs.end()) return -std::log2(static_cast<double>(pit->second) / (n + d));
        double esc = -std::log2(static_cast<double>(d) / (n + d));
        return esc + (alphabet > d ? std::log2(static_cast<double>(alphabet - d)) : 0.0);
    }
    void push(std::uint32_t s, std::uint32_t alphabet) {
        bits += cost(s, alphabet);
        auto& c = pairs[(static_cast<std::uint64_t>(prev) << 32) | s];
        auto& t = ctx[prev];
        if (c == 0) ++t.second;
        ++c;
        ++t.first;
        prev = s;
    }
};

struct BeamNode {
    std::uint32_t sym;
    std::shared_ptr<const BeamNode> parent;
};

struct BeamEntry {
    Order1Cost cost;
    std::shared_ptr<const BeamNode> tail;
};

inline std::vector<std::uint32_t> unwind(const std::shared_ptr<const BeamNode>& t) {
    std::vector<std::uint32_t> out;
    for (auto p = t.get(); p; p = p->parent.get()) out.push_back(p->sym);
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Symbolic orbit of x0 (codes times 0..n-1) against a cover.
inline SymbolicString symbolic_orbit(const SystemSpec& s, const Rational& x0, const Cover& cover, long n,
                                     CodingPolicy policy = {}, OrbitOptions opt = {}) {
    if (cover.space != s.space) throw ArgumentError("cover and system live on different spaces");
    if (n < 0) throw ArgumentError("negative orbit length");
    CoverIndex idx(cover);
    SymbolicString out;
    out.alphabet = idx.alphabet();
    out.cover_id = cover.id;
    out.policy = policy.name();
    if (n == 0) return out;

    if (policy.kind != PolicyKind::beam) {
        std::vector<std::uint32_t> syms;
        walk_orbit(
            s, x0, n,
            [&](long k, const EnclosureView& v) {
                if (k == 0) syms.clear();
                long c = policy.kind == PolicyKind::nice ? idx.nice(v) : idx.canonical(v);
                if (c == -2) throw InvalidCover("orbit point outside every ball of '" + cover.id + "'");
                if (c < 0) return false;
                syms.push_back(static_cast<std::uint32_t>(c));
                return true;
            },
            opt);
        out.symbols = std::move(syms);
        return out;
    }

    std::vector<detail::BeamEntry> beam;
    const auto width = static_cast<std::size_t>(std::max(1, policy.beam_width));
    walk_orbit(
        s, x0, n,
        [&](long k, const EnclosureView& v) {
            if (k == 0) beam.assign(1, {});
            auto choices = idx.all_in(v);
            if (choices.empty()) {
                if (idx.canonical(v) == -2) throw InvalidCover("orbit point outside every ball of '" + cover.id + "'");
                return false;
            }
            std::vector<detail::BeamEntry> next;
            for (const auto& e : beam)
                for (auto c : choices) {
                    detail::BeamEntry ne = e;
                    ne.cost.push(c, idx.alphabet());
                    ne.tail = std::make_shared<const detail::BeamNode>(detail::BeamNode{c, e.tail});
                    next.push_back(std::move(ne));
                }
            std::stable_sort(next.begin(), next.end(),
                             [](const auto& a, const auto& b) { return a.cost.bits < b.cost.bits; });
            if (next.size() > width) next.resize(width);
            beam = std::move(next);
            return true;
        },
        opt);
    double best = beam.front().cost.bits;
    std::vector<std::uint32_t> pick;
    for (const auto& e : beam) {
        if (e.cost.bits > best) continue;
        auto w = detail::unwind(e.tail);
        if (pick.empty() || w < pick) pick = std::move(w);
    }
    out.symbols = std::move(pick);
    return out;
}

}  // namespace orbitgauge
