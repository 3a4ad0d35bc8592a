#ifndef CIV_GREEDY_HPP
#define CIV_GREEDY_HPP

#include <string>
#include <vector>

#include <civ/criteria.hpp>
#include <civ/error.hpp>
#include <civ/graph.hpp>
#include <civ/msep.hpp>

namespace civ {

enum class GreedyAction { AddedToZ, AddedToW, Discarded };

inline const char* to_string(GreedyAction a) {
    switch (a) {
        case GreedyAction::AddedToZ: return "AddedToZ";
        case GreedyAction::AddedToW: return "AddedToW";
        default: return "Discarded";
    }
}

struct GreedyStep {
    int node;
    GreedyAction action;
    // Guard flags the action was derived from: zv/wv = tuple stays valid with
    // the node in Z/W, zg/wg = the matching dependence guard held.
    std::string reason;
};

struct GreedyTrace {
    std::vector<GreedyStep> steps;
    CondInstrumentSet result;
    std::vector<int> order;
};

// Which sets feed the dependence guards. Running uses the sets grown so far,
// which is what makes each accepted step a strict non-increase of the
// asymptotic variance; Original evaluates both guards against the start
// tuple's sets instead.
enum class GuardSets { Running, Original };

// Grow a valid tuple one candidate at a time: a node goes to Z when the
// enlarged tuple stays valid and the node still carries information on X, to
// W when the enlarged tuple stays valid and the node still carries
// information on Y in the cut graph, and is discarded otherwise. The result
// is valid and never less efficient than the start tuple; the output depends
// on the visiting order.
inline GreedyTrace greedy_forward(const Admg& g, int x, int y, const CondInstrumentSet& start,
                                  const std::vector<int>* order = nullptr,
                                  GuardSets guards = GuardSets::Running) {
    require_reduced(g, x, y);
    CisContext ctx(g, x, y);
    if (!ctx.check(start).valid)
        throw Error(errc::invalid_tuple, "start tuple is not valid");

    NodeSet fixed = start.z.unite(start.w);
    fixed.insert(x);
    fixed.insert(y);
    std::vector<int> visit;
    if (order) {
        NodeSet claimed(*order);
        if (claimed.size() != order->size() || !(claimed == g.all_nodes().minus(fixed)))
            throw Error(errc::precondition,
                        "order must be a permutation of the nodes outside the start tuple");
        visit = *order;
    } else {
        for (int v = 0; v < g.num_nodes(); ++v)
            if (!fixed.contains(v)) visit.push_back(v);
    }

    NodeSet xs = NodeSet::single(x), ys = NodeSet::single(y);
    GreedyTrace trace;
    trace.order = visit;
    NodeSet z = start.z, w = start.w;
    for (int n : visit) {
        NodeSet zn = z, wn = w;
        zn.insert(n);
        wn.insert(n);
        const NodeSet& guard_z_cond =
            guards == GuardSets::Running ? w.unite(z) : start.w.unite(start.z);
        const NodeSet& guard_w_cond = guards == GuardSets::Running ? w : start.w;

        bool zv = ctx.check({zn, w}).valid;
        bool zg = zv && !m_separated(g, NodeSet::single(n), xs, guard_z_cond);
        bool wv = false, wg = false;
        if (!(zv && zg)) {
            wv = ctx.check({z, wn}).valid;
            wg = wv && !m_separated(ctx.tilde(), NodeSet::single(n), ys, guard_w_cond);
        }

        auto flags = [&] {
            return "zv=" + std::to_string(zv) + ",zg=" + std::to_string(zg) +
                   ",wv=" + std::to_string(wv) + ",wg=" + std::to_string(wg);
        };
        if (zv && zg) {
            z = zn;
            trace.steps.push_back({n, GreedyAction::AddedToZ, flags()});
        } else if (wv && wg) {
            w = wn;
            trace.steps.push_back({n, GreedyAction::AddedToW, flags()});
        } else {
            trace.steps.push_back({n, GreedyAction::Discarded, flags()});
        }
    }
    trace.result = {z, w};
    return trace;
}

}  // namespace civ

#endif  // CIV_GREEDY_HPP
