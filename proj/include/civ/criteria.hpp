#ifndef CIV_CRITERIA_HPP
#define CIV_CRITERIA_HPP

#include <string>
#include <vector>

#include <civ/error.hpp>
#include <civ/graph.hpp>
#include <civ/msep.hpp>

namespace civ {

// Candidate instrument/conditioning pair (Z, W); the sets are disjoint and
// exclude the treatment and outcome when bound to a query.
struct CondInstrumentSet {
    NodeSet z, w;

    friend bool operator==(const CondInstrumentSet& a, const CondInstrumentSet& b) {
        return a.z == b.z && a.w == b.w;
    }
};

struct ValidityReport {
    bool valid;
    bool cond_i;    // (Z u W) disjoint from the forbidden nodes
    bool cond_ii;   // Z dependent on X given W
    bool cond_iii;  // Z separated from Y given W once X's causal out-edges are cut
};

// Caches the forbidden set and the cut graph for repeated validity checks
// against one (graph, x, y) query.
class CisContext {
public:
    CisContext(const Admg& g, int x, int y)
        : g_(g),
          x_(x),
          y_(y),
          forb_(forbidden_nodes(g, x, y)),
          tilde_(remove_causal_out_edges(g, x, y)) {}

    const Admg& graph() const { return g_; }
    const Admg& tilde() const { return tilde_; }
    const NodeSet& forbidden() const { return forb_; }
    int x() const { return x_; }
    int y() const { return y_; }

    void validate_tuple(const CondInstrumentSet& t) const {
        g_.check_set(t.z);
        g_.check_set(t.w);
        if (t.z.intersects(t.w))
            throw Error(errc::overlap, "instrumental and conditioning sets overlap");
        NodeSet zw = t.z.unite(t.w);
        if (zw.contains(x_) || zw.contains(y_))
            throw Error(errc::precondition, "tuple may not contain the treatment or outcome");
    }

    ValidityReport check(const CondInstrumentSet& t) const {
        validate_tuple(t);
        ValidityReport r{};
        r.cond_i = !t.z.unite(t.w).intersects(forb_);
        r.cond_ii = !m_separated(g_, t.z, NodeSet::single(x_), t.w);
        r.cond_iii = m_separated(tilde_, t.z, NodeSet::single(y_), t.w);
        r.valid = r.cond_i && r.cond_ii && r.cond_iii;
        return r;
    }

private:
    const Admg& g_;
    int x_, y_;
    NodeSet forb_;
    Admg tilde_;
};

inline ValidityReport is_valid_cis(const Admg& g, int x, int y, const CondInstrumentSet& t) {
    return CisContext(g, x, y).check(t);
}

// W is a valid adjustment set iff it avoids the forbidden nodes and blocks
// every x-y path that remains once x's causal out-edges are cut.
inline bool is_valid_adjustment(const Admg& g, int x, int y, const NodeSet& w) {
    g.check_set(w);
    if (w.contains(x) || w.contains(y))
        throw Error(errc::precondition, "adjustment set may not contain the treatment or outcome");
    if (w.intersects(forbidden_nodes(g, x, y))) return false;
    Admg tilde = remove_causal_out_edges(g, x, y);
    return m_separated(tilde, NodeSet::single(x), NodeSet::single(y), w);
}

// All valid (Z, W) over the candidate pool, in deterministic order: by |Z|,
// then Z, then W (node-order lexicographic). Candidates default to every node
// other than x and y; forbidden candidates are pruned up front since no valid
// tuple may touch them. Brute force over 3^k assignments, guarded by a cap.
inline std::vector<CondInstrumentSet> enumerate_valid_cis(
    const Admg& g, int x, int y, const NodeSet* candidates = nullptr,
    std::size_t cap = 20) {
    NodeSet pool;
    if (candidates) {
        g.check_set(*candidates);
        if (candidates->contains(x) || candidates->contains(y))
            throw Error(errc::precondition, "candidates may not contain the treatment or outcome");
        pool = *candidates;
    } else {
        pool = g.all_nodes();
        pool.erase(x);
        pool.erase(y);
    }
    if (pool.size() > cap)
        throw Error(errc::cap, "candidate pool of " + std::to_string(pool.size()) +
                                   " nodes exceeds the enumeration cap of " + std::to_string(cap));

    CisContext ctx(g, x, y);
    std::vector<int> usable;
    for (int v : pool)
        if (!ctx.forbidden().contains(v)) usable.push_back(v);

    std::vector<CondInstrumentSet> out;
    std::vector<int> z_ids, w_ids;
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
        if (i == usable.size()) {
            if (z_ids.empty()) return;
            CondInstrumentSet t{NodeSet(z_ids), NodeSet(w_ids)};
            ValidityReport r = ctx.check(t);
            if (r.valid) out.push_back(std::move(t));
            return;
        }
        assign(i + 1);
        z_ids.push_back(usable[i]);
        assign(i + 1);
        z_ids.pop_back();
        w_ids.push_back(usable[i]);
        assign(i + 1);
        w_ids.pop_back();
    };
    assign(0);

    std::sort(out.begin(), out.end(), [](const CondInstrumentSet& a, const CondInstrumentSet& b) {
        if (a.z.size() != b.z.size()) return a.z.size() < b.z.size();
        if (!(a.z == b.z)) return a.z < b.z;
        return a.w < b.w;
    });
    return out;
}

// The four separation checks behind the pairwise asymptotic-variance
// comparison of two valid tuples (t1, t2). Each check guards one way the
// variance could move: (residual) W1-only covariates may not lower t2's
// residual variance; (w1/w2/z1 extra) the sets in which the tuples differ may
// not shift the instrumental strength in t1's favour. A check with an empty
// left-hand set holds vacuously.
struct ComparisonConditions {
    bool residual_ok;  // W1\W2 separated from Y given W2 in the cut graph
    bool w1_extra_ok;  // W1\W2 adds no instrument information beyond (Z2, W2)
    bool w2_extra_ok;  // W2\W1 removes no instrument information from (Z1, W1)
    bool z1_extra_ok;  // Z1-only instruments add nothing beyond (Z2, W1, W2\W1)

    bool all() const { return residual_ok && w1_extra_ok && w2_extra_ok && z1_extra_ok; }
};

namespace detail {

// Separation with the conventions the comparison conditions need: an empty
// left-hand side holds vacuously, and a left-hand side meeting the right-hand
// side cannot be separated.
inline bool vacuous_msep(const Admg& g, const NodeSet& s, const NodeSet& t, const NodeSet& w) {
    if (s.empty() || t.empty()) return true;
    if (s.intersects(t)) return false;
    return m_separated(g, s, t, w);
}

}  // namespace detail

inline ComparisonConditions comparison_conditions(const CisContext& ctx,
                                                  const CondInstrumentSet& t1,
                                                  const CondInstrumentSet& t2) {
    if (!ctx.check(t1).valid || !ctx.check(t2).valid)
        throw Error(errc::invalid_tuple, "both tuples must be valid to compare them");

    const Admg& g = ctx.graph();
    NodeSet x = NodeSet::single(ctx.x());
    NodeSet y = NodeSet::single(ctx.y());
    NodeSet w12 = t1.w.minus(t2.w);
    NodeSet w21 = t2.w.minus(t1.w);

    ComparisonConditions c{};
    c.residual_ok = detail::vacuous_msep(ctx.tilde(), w12, y, t2.w);
    c.w1_extra_ok = detail::vacuous_msep(g, w12, t2.z, t2.w) ||
                    detail::vacuous_msep(g, w12.minus(t2.z), x, t2.z.unite(t2.w));
    c.w2_extra_ok = (detail::vacuous_msep(g, w21.minus(t1.z), t1.z, t1.w) &&
                     detail::vacuous_msep(g, w21.intersect(t1.z), x,
                                          t1.w.unite(w21.minus(t1.z)))) ||
                    detail::vacuous_msep(g, w21, x, t1.w);
    c.z1_extra_ok = detail::vacuous_msep(g, t1.z.minus(t2.z.unite(w21)), x,
                                         t2.z.unite(t1.w).unite(w21));
    return c;
}

inline ComparisonConditions comparison_conditions(const Admg& g, int x, int y,
                                                  const CondInstrumentSet& t1,
                                                  const CondInstrumentSet& t2) {
    return comparison_conditions(CisContext(g, x, y), t1, t2);
}

enum class Verdict { SecondAtMostFirst, FirstAtMostSecond, Equal, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::SecondAtMostFirst: return "SecondAtMostFirst";
        case Verdict::FirstAtMostSecond: return "FirstAtMostSecond";
        case Verdict::Equal: return "Equal";
        default: return "Inconclusive";
    }
}

struct Dominance {
    Verdict verdict;
    ComparisonConditions forward;  // conditions applied to (t1, t2)
    ComparisonConditions reverse;  // conditions applied to (t2, t1)
};

inline void require_reduced(const Admg& g, int x, int y) {
    NodeSet de_x = descendants(g, NodeSet::single(x));
    if (!(de_x == NodeSet(std::vector<int>{x, y})))
        throw Error(errc::unreduced,
                    "query requires de(X) = {X, Y}; apply reduce_for_estimation first");
}

// Verdict on which of two valid tuples yields the (weakly) smaller asymptotic
// variance across all compatible models with nondegenerate instrument
// strength. SecondAtMostFirst means t2 is at least as efficient as t1.
inline Dominance compare_cis(const Admg& g, int x, int y, const CondInstrumentSet& t1,
                             const CondInstrumentSet& t2) {
    require_reduced(g, x, y);
    CisContext ctx(g, x, y);
    Dominance d{};
    d.forward = comparison_conditions(ctx, t1, t2);
    d.reverse = comparison_conditions(ctx, t2, t1);
    bool fwd = d.forward.all(), rev = d.reverse.all();
    d.verdict = fwd && rev  ? Verdict::Equal
                : fwd       ? Verdict::SecondAtMostFirst
                : rev       ? Verdict::FirstAtMostSecond
                            : Verdict::Inconclusive;
    return d;
}

// True iff the covariates s can be moved from the conditioning set into the
// instrumental set, in which case (z u s, w) is at least as efficient as
// (z, w u s).
inline bool suggests_instrument_over_conditioning(const Admg& g, int x, int y, const NodeSet& z,
                                                  const NodeSet& w, const NodeSet& s) {
    CisContext ctx(g, x, y);
    if (s.intersects(w))
        throw Error(errc::precondition, "moved covariates must lie outside the conditioning set");
    if (!ctx.check({z, w.unite(s)}).valid)
        throw Error(errc::invalid_tuple, "(Z, W u S) must be a valid tuple");
    return ctx.check({z.unite(s), w}).valid;
}

// True iff n may enter the conditioning set but not the instrumental set;
// conditioning on such a node cannot increase the asymptotic variance.
inline bool conditioning_cannot_hurt(const Admg& g, int x, int y, const NodeSet& z,
                                     const NodeSet& w, int n) {
    g.check_node(n);
    if (z.contains(n) || w.contains(n))
        throw Error(errc::precondition, "candidate node already lies in the tuple");
    CisContext ctx(g, x, y);
    NodeSet wn = w;
    wn.insert(n);
    NodeSet zn = z;
    zn.insert(n);
    return ctx.check({z, wn}).valid && !ctx.check({zn, w}).valid;
}

}  // namespace civ

#endif  // CIV_CRITERIA_HPP
