#ifndef CIV_GRAPH_HPP
#define CIV_GRAPH_HPP

#include <algorithm>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <civ/error.hpp>

namespace civ {

enum class EdgeKind { Directed, Bidirected };

// Edge in name form, used for construction and serialization. Bidirected
// edges are canonicalized so that tail < head lexicographically.
struct Edge {
    EdgeKind kind;
    std::string tail;
    std::string head;
};

// Sorted set of node indices relative to one graph's node order. Set-valued
// query results iterate in node order, which keeps all outputs deterministic.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::vector<int> ids) : ids_(std::move(ids)) {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }
    static NodeSet of(std::initializer_list<int> ids) { return NodeSet(std::vector<int>(ids)); }
    static NodeSet single(int id) { return NodeSet({id}); }

    bool contains(int id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

    void insert(int id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) ids_.insert(it, id);
    }

    void erase(int id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it != ids_.end() && *it == id) ids_.erase(it);
    }

    NodeSet unite(const NodeSet& other) const {
        std::vector<int> out;
        std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                       std::back_inserter(out));
        return NodeSet(std::move(out));
    }

    NodeSet minus(const NodeSet& other) const {
        std::vector<int> out;
        std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                            std::back_inserter(out));
        return NodeSet(std::move(out));
    }

    NodeSet intersect(const NodeSet& other) const {
        std::vector<int> out;
        std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                              std::back_inserter(out));
        return NodeSet(std::move(out));
    }

    bool intersects(const NodeSet& other) const { return !intersect(other).empty(); }

    bool is_subset_of(const NodeSet& other) const {
        return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
    }

    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<int>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    friend bool operator==(const NodeSet& a, const NodeSet& b) { return a.ids_ == b.ids_; }
    friend bool operator<(const NodeSet& a, const NodeSet& b) { return a.ids_ < b.ids_; }

private:
    std::vector<int> ids_;
};

// Immutable acyclic directed mixed graph over named nodes. Node order is
// first-mention order from the source; all queries are pure and thread-safe.
class Admg {
public:
    static Admg create(std::vector<std::string> nodes, const std::vector<Edge>& edges) {
        Admg g;
        g.names_ = std::move(nodes);
        for (int i = 0; i < static_cast<int>(g.names_.size()); ++i) {
            validate_identifier(g.names_[i]);
            if (!g.index_.emplace(g.names_[i], i).second)
                throw Error(errc::syntax, "duplicate node name '" + g.names_[i] + "'");
        }
        int n = g.num_nodes();
        g.parents_.assign(n, {});
        g.children_.assign(n, {});
        g.siblings_.assign(n, {});
        for (const auto& e : edges) {
            int t = g.index_of(e.tail);
            int h = g.index_of(e.head);
            if (t == h) throw Error(errc::self_loop, "self loop at '" + e.tail + "'");
            if (e.kind == EdgeKind::Directed) {
                if (std::count(g.children_[t].begin(), g.children_[t].end(), h) > 0)
                    throw Error(errc::duplicate_edge,
                                "duplicate edge " + e.tail + " -> " + e.head);
                g.children_[t].push_back(h);
                g.parents_[h].push_back(t);
            } else {
                if (std::count(g.siblings_[t].begin(), g.siblings_[t].end(), h) > 0)
                    throw Error(errc::duplicate_edge,
                                "duplicate edge " + e.tail + " <-> " + e.head);
                g.siblings_[t].push_back(h);
                g.siblings_[h].push_back(t);
            }
        }
        for (auto& adj : g.parents_) std::sort(adj.begin(), adj.end());
        for (auto& adj : g.children_) std::sort(adj.begin(), adj.end());
        for (auto& adj : g.siblings_) std::sort(adj.begin(), adj.end());
        g.topo_order_ = g.compute_topological_order();
        return g;
    }

    int num_nodes() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& node_names() const { return names_; }
    const std::string& name(int id) const { return names_.at(id); }

    bool has_node(const std::string& name) const { return index_.count(name) > 0; }

    int index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(errc::unknown_node, "unknown node '" + name + "'");
        return it->second;
    }

    NodeSet node_set(const std::vector<std::string>& names) const {
        std::vector<int> ids;
        ids.reserve(names.size());
        for (const auto& n : names) ids.push_back(index_of(n));
        return NodeSet(std::move(ids));
    }

    std::vector<std::string> names_of(const NodeSet& s) const {
        check_set(s);
        std::vector<std::string> out;
        out.reserve(s.size());
        for (int id : s) out.push_back(names_[id]);
        return out;
    }

    NodeSet all_nodes() const {
        std::vector<int> ids(names_.size());
        for (int i = 0; i < num_nodes(); ++i) ids[i] = i;
        return NodeSet(std::move(ids));
    }

    const std::vector<int>& parents_of(int id) const { return parents_.at(id); }
    const std::vector<int>& children_of(int id) const { return children_.at(id); }
    const std::vector<int>& siblings_of(int id) const { return siblings_.at(id); }

    bool has_directed(int tail, int head) const {
        const auto& c = children_.at(tail);
        return std::binary_search(c.begin(), c.end(), head);
    }

    bool has_bidirected(int a, int b) const {
        const auto& s = siblings_.at(a);
        return std::binary_search(s.begin(), s.end(), b);
    }

    // Deterministic edge list: directed edges sorted by (tail, head), then
    // bidirected edges canonicalized with the lexicographically smaller name
    // first and sorted the same way.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (int t = 0; t < num_nodes(); ++t)
            for (int h : children_[t]) out.push_back({EdgeKind::Directed, names_[t], names_[h]});
        for (int a = 0; a < num_nodes(); ++a)
            for (int b : siblings_[a]) {
                if (a < b) {
                    const std::string& u = names_[a];
                    const std::string& v = names_[b];
                    if (u < v)
                        out.push_back({EdgeKind::Bidirected, u, v});
                    else
                        out.push_back({EdgeKind::Bidirected, v, u});
                }
            }
        return out;
    }

    std::size_t num_directed_edges() const {
        std::size_t k = 0;
        for (const auto& c : children_) k += c.size();
        return k;
    }

    std::size_t num_bidirected_edges() const {
        std::size_t k = 0;
        for (const auto& s : siblings_) k += s.size();
        return k / 2;
    }

    const std::vector<int>& topological_order() const { return topo_order_; }

    void check_node(int id) const {
        if (id < 0 || id >= num_nodes())
            throw Error(errc::unknown_node, "node index out of range");
    }

    void check_set(const NodeSet& s) const {
        if (!s.empty()) {
            check_node(s.ids().front());
            check_node(s.ids().back());
        }
    }

    friend bool operator==(const Admg& a, const Admg& b) {
        return a.names_ == b.names_ && a.parents_ == b.parents_ && a.siblings_ == b.siblings_;
    }

private:
    Admg() = default;

    static void validate_identifier(const std::string& s) {
        auto ok_first = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
        auto ok_rest = [&](char c) { return ok_first(c) || std::isdigit(static_cast<unsigned char>(c)); };
        bool good = !s.empty() && ok_first(s[0]) &&
                    std::all_of(s.begin() + 1, s.end(), ok_rest);
        if (!good) throw Error(errc::syntax, "invalid node name '" + s + "'");
    }

    std::vector<int> compute_topological_order() const {
        int n = num_nodes();
        std::vector<int> indeg(n, 0), order;
        order.reserve(n);
        for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(parents_[i].size());
        std::vector<int> queue;
        for (int i = 0; i < n; ++i)
            if (indeg[i] == 0) queue.push_back(i);
        while (!queue.empty()) {
            int v = queue.front();
            queue.erase(queue.begin());
            order.push_back(v);
            for (int c : children_[v])
                if (--indeg[c] == 0) queue.push_back(c);
        }
        if (static_cast<int>(order.size()) != n)
            throw Error(errc::cycle, "directed subgraph contains a cycle");
        return order;
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<int>> parents_, children_, siblings_;
    std::vector<int> topo_order_;
};

// Parents of a set: union of pa(v) over members; does not include the members
// themselves unless they parent each other.
inline NodeSet parents(const Admg& g, const NodeSet& s) {
    g.check_set(s);
    NodeSet out;
    for (int v : s)
        for (int p : g.parents_of(v)) out.insert(p);
    return out;
}

inline NodeSet children(const Admg& g, const NodeSet& s) {
    g.check_set(s);
    NodeSet out;
    for (int v : s)
        for (int c : g.children_of(v)) out.insert(c);
    return out;
}

namespace detail {

// Directed-reachability closure; `forward` follows child edges (descendants).
inline NodeSet directed_closure(const Admg& g, const NodeSet& s, bool forward) {
    g.check_set(s);
    std::vector<char> seen(g.num_nodes(), 0);
    std::vector<int> stack(s.begin(), s.end());
    for (int v : stack) seen[v] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        const auto& next = forward ? g.children_of(v) : g.parents_of(v);
        for (int u : next)
            if (!seen[u]) {
                seen[u] = 1;
                stack.push_back(u);
            }
    }
    std::vector<int> ids;
    for (int i = 0; i < g.num_nodes(); ++i)
        if (seen[i]) ids.push_back(i);
    return NodeSet(std::move(ids));
}

}  // namespace detail

// Ancestors/descendants/siblings include the members themselves.
inline NodeSet ancestors(const Admg& g, const NodeSet& s) {
    return detail::directed_closure(g, s, false);
}

inline NodeSet descendants(const Admg& g, const NodeSet& s) {
    return detail::directed_closure(g, s, true);
}

inline NodeSet siblings(const Admg& g, const NodeSet& s) {
    g.check_set(s);
    NodeSet out;
    for (int v : s) {
        out.insert(v);
        for (int b : g.siblings_of(v)) out.insert(b);
    }
    return out;
}

// Nodes on causal paths from x to y, excluding x. A node lies on such a path
// exactly when it descends from x and y descends from it (walk concatenation
// is a path in an acyclic graph). Empty when y is not a descendant of x.
inline NodeSet causal_nodes(const Admg& g, int x, int y) {
    g.check_node(x);
    g.check_node(y);
    if (x == y) throw Error(errc::precondition, "treatment and outcome must differ");
    NodeSet de_x = descendants(g, NodeSet::single(x));
    if (!de_x.contains(y)) return {};
    NodeSet an_y = ancestors(g, NodeSet::single(y));
    NodeSet cn = de_x.intersect(an_y);
    cn.erase(x);
    return cn;
}

// forb(x, y) = de(cn(x, y)) united with x; always contains x.
inline NodeSet forbidden_nodes(const Admg& g, int x, int y) {
    NodeSet cn = causal_nodes(g, x, y);
    NodeSet forb = descendants(g, cn);
    forb.insert(x);
    return forb;
}

// Remove all edges out of x that start a causal path from x to y, i.e. the
// edges x -> c with c a causal node. Node order is preserved.
inline Admg remove_causal_out_edges(const Admg& g, int x, int y) {
    NodeSet cn = causal_nodes(g, x, y);
    std::vector<Edge> kept;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::Directed && g.index_of(e.tail) == x &&
            cn.contains(g.index_of(e.head)))
            continue;
        kept.push_back(e);
    }
    return Admg::create(g.node_names(), kept);
}

// Latent projection over l: keeps nodes outside l, adds a directed edge u -> w
// when a directed path runs u -> ... -> w through l only, and a bidirected
// edge u <-> w when some path with all intermediates in l and non-colliders
// has arrowheads at both u and w. Preserves every m-separation among the
// retained nodes.
inline Admg latent_projection(const Admg& g, const NodeSet& l) {
    g.check_set(l);
    int n = g.num_nodes();
    std::vector<char> latent(n, 0);
    for (int v : l) latent[v] = 1;

    std::vector<std::string> kept_names;
    for (int i = 0; i < n; ++i)
        if (!latent[i]) kept_names.push_back(g.name(i));

    std::vector<Edge> edges;

    // Directed edges: reach retained nodes through latent-only intermediates.
    for (int u = 0; u < n; ++u) {
        if (latent[u]) continue;
        std::vector<char> seen(n, 0);
        std::vector<int> stack{u};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int c : g.children_of(v)) {
                if (seen[c]) continue;
                seen[c] = 1;
                if (latent[c])
                    stack.push_back(c);
                else
                    edges.push_back({EdgeKind::Directed, g.name(u), g.name(c)});
            }
        }
    }

    // Bidirected edges: depth-first search over simple paths whose interior
    // lies in l. The first edge must point back at u and the last must point
    // at w; an interior node entered through an arrowhead must be left
    // through a tail (otherwise it would be a collider).
    std::vector<char> on_path(n, 0);
    std::function<bool(int, bool, int)> dfs = [&](int v, bool arrived_head, int target) -> bool {
        if (v == target) return arrived_head;
        if (!latent[v]) return false;
        if (on_path[v]) return false;
        on_path[v] = 1;
        bool found = false;
        if (!arrived_head) {
            for (int p : g.parents_of(v))
                if ((found = dfs(p, false, target))) break;
            if (!found)
                for (int b : g.siblings_of(v))
                    if ((found = dfs(b, true, target))) break;
        }
        if (!found)
            for (int c : g.children_of(v))
                if ((found = dfs(c, true, target))) break;
        on_path[v] = 0;
        return found;
    };

    for (int u = 0; u < n; ++u) {
        if (latent[u]) continue;
        for (int w = u + 1; w < n; ++w) {
            if (latent[w]) continue;
            on_path[u] = 1;
            bool linked = false;
            for (int p : g.parents_of(u))
                if ((linked = dfs(p, false, w))) break;
            if (!linked)
                for (int b : g.siblings_of(u))
                    if ((linked = dfs(b, true, w))) break;
            on_path[u] = 0;
            if (linked) {
                const std::string& a = g.name(u);
                const std::string& b = g.name(w);
                edges.push_back({EdgeKind::Bidirected, a < b ? a : b, a < b ? b : a});
            }
        }
    }

    return Admg::create(std::move(kept_names), edges);
}

struct ReducedGraph {
    Admg graph;
    bool zero_effect;  // true when y is not a descendant of x
};

// Project out every forbidden node and every remaining descendant of x (other
// than x and y). In the result de(x) = {x, y} and validity of any tuple over
// the retained nodes is unchanged.
inline ReducedGraph reduce_for_estimation(const Admg& g, int x, int y) {
    NodeSet drop = forbidden_nodes(g, x, y).unite(descendants(g, NodeSet::single(x)));
    drop.erase(x);
    drop.erase(y);
    bool zero = !descendants(g, NodeSet::single(x)).contains(y);
    return {latent_projection(g, drop), zero};
}

// Bidirected-connected component of n in the subgraph induced on the nodes
// outside w; includes n itself.
inline NodeSet district(const Admg& g, int n, const NodeSet& w) {
    g.check_node(n);
    g.check_set(w);
    if (w.contains(n)) throw Error(errc::overlap, "district node lies in the removed set");
    std::vector<char> seen(g.num_nodes(), 0);
    std::vector<int> stack{n};
    seen[n] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int b : g.siblings_of(v))
            if (!seen[b] && !w.contains(b)) {
                seen[b] = 1;
                stack.push_back(b);
            }
    }
    std::vector<int> ids;
    for (int i = 0; i < g.num_nodes(); ++i)
        if (seen[i]) ids.push_back(i);
    return NodeSet(std::move(ids));
}

// dis_w(n) united with its parents, minus w.
inline NodeSet district_plus(const Admg& g, int n, const NodeSet& w) {
    NodeSet dis = district(g, n, w);
    return dis.unite(parents(g, dis)).minus(w);
}

}  // namespace civ

#endif  // CIV_GRAPH_HPP
