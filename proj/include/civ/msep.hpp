#ifndef CIV_MSEP_HPP
#define CIV_MSEP_HPP

#include <vector>

#include <civ/error.hpp>
#include <civ/graph.hpp>

namespace civ {

struct SeparationQuery {
    NodeSet s, t, w;
};

namespace detail {

// Reachability over walk states (node, arrival mark). A walk may continue
// through a node as a non-collider only if the node is outside w, and as a
// collider (arrowheads on both sides) only if the node is in w. Linear in
// the number of edges.
inline std::vector<char> walk_reach(const Admg& g, const NodeSet& s, const NodeSet& w) {
    int n = g.num_nodes();
    // visited[v] bit 0: arrived with tail mark; bit 1: arrived with head mark
    std::vector<char> visited(n, 0);
    std::vector<std::pair<int, bool>> stack;

    auto push = [&](int v, bool head) {
        char bit = head ? 2 : 1;
        if (!(visited[v] & bit)) {
            visited[v] = static_cast<char>(visited[v] | bit);
            stack.emplace_back(v, head);
        }
    };

    for (int v : s) {
        for (int c : g.children_of(v)) push(c, true);
        for (int p : g.parents_of(v)) push(p, false);
        for (int b : g.siblings_of(v)) push(b, true);
    }

    while (!stack.empty()) {
        auto [v, head] = stack.back();
        stack.pop_back();
        bool conditioned = w.contains(v);
        if (conditioned) {
            if (head) {  // collider in w: leave through another arrowhead
                for (int p : g.parents_of(v)) push(p, false);
                for (int b : g.siblings_of(v)) push(b, true);
            }
        } else {
            for (int c : g.children_of(v)) push(c, true);
            if (!head) {
                for (int p : g.parents_of(v)) push(p, false);
                for (int b : g.siblings_of(v)) push(b, true);
            }
        }
    }
    return visited;
}

}  // namespace detail

// True iff w blocks every walk (equivalently every path) between s and t.
// The empty set is separated from anything.
inline bool m_separated(const Admg& g, const SeparationQuery& q) {
    g.check_set(q.s);
    g.check_set(q.t);
    g.check_set(q.w);
    if (q.s.intersects(q.t) || q.s.intersects(q.w) || q.t.intersects(q.w))
        throw Error(errc::overlap, "separation query sets must be pairwise disjoint");
    if (q.s.empty() || q.t.empty()) return true;
    auto visited = detail::walk_reach(g, q.s, q.w);
    for (int v : q.t)
        if (visited[v]) return false;
    return true;
}

inline bool m_separated(const Admg& g, const NodeSet& s, const NodeSet& t, const NodeSet& w) {
    return m_separated(g, SeparationQuery{s, t, w});
}

// Nodes outside w connected to s by a walk open given w; contains s itself.
inline NodeSet reachable(const Admg& g, const NodeSet& s, const NodeSet& w) {
    g.check_set(s);
    g.check_set(w);
    if (s.intersects(w)) throw Error(errc::overlap, "source set intersects conditioning set");
    auto visited = detail::walk_reach(g, s, w);
    NodeSet out = s;
    for (int v = 0; v < g.num_nodes(); ++v)
        if (visited[v] && !w.contains(v)) out.insert(v);
    return out;
}

}  // namespace civ

#endif  // CIV_MSEP_HPP
