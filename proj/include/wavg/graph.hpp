#pragma once

// Directed-graph model and the neighborhood/reachability queries used by the
// condition checkers and the wait predicates. Graphs are immutable values:
// build once via DiGraph::directed / DiGraph::undirected, then query freely
// from any thread. Undirected graphs are stored as digraphs closed under edge
// reversal so every algorithm runs unmodified on them.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wavg {

using NodeId = int;
using NodeSet = std::set<NodeId>;
using Edge = std::pair<NodeId, NodeId>;

class DiGraph {
public:
    static DiGraph directed(int n, std::vector<Edge> edges,
                            std::vector<std::string> labels = {}) {
        return DiGraph(n, std::move(edges), false, std::move(labels));
    }

    // Each listed edge is symmetrized; (i,j) and (j,i) both end up present.
    static DiGraph undirected(int n, std::vector<Edge> edges,
                              std::vector<std::string> labels = {}) {
        std::vector<Edge> sym;
        sym.reserve(edges.size() * 2);
        for (const auto& [i, j] : edges) {
            sym.emplace_back(i, j);
            sym.emplace_back(j, i);
        }
        return DiGraph(n, std::move(sym), true, std::move(labels));
    }

    int size() const { return n_; }
    bool is_undirected() const { return undirected_; }

    bool has_edge(NodeId i, NodeId j) const {
        check_node(i);
        check_node(j);
        return std::binary_search(out_[i].begin(), out_[i].end(), j);
    }

    const std::vector<NodeId>& out(NodeId i) const {
        check_node(i);
        return out_[i];
    }
    const std::vector<NodeId>& in(NodeId i) const {
        check_node(i);
        return in_[i];
    }

    // All edges, sorted; stable basis for serialization and iteration order.
    const std::vector<Edge>& edges() const { return edges_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    bool has_labels() const { return !labels_.empty(); }
    const std::string& label(NodeId i) const {
        check_node(i);
        static const std::string empty;
        return labels_.empty() ? empty : labels_[static_cast<size_t>(i)];
    }
    std::optional<NodeId> node_by_label(const std::string& name) const {
        auto it = label_index_.find(name);
        if (it == label_index_.end()) return std::nullopt;
        return it->second;
    }
    // Label when present, otherwise the decimal index.
    std::string display(NodeId i) const {
        check_node(i);
        if (!labels_.empty() && !labels_[static_cast<size_t>(i)].empty())
            return labels_[static_cast<size_t>(i)];
        return std::to_string(i);
    }

    void check_node(NodeId i) const {
        if (i < 0 || i >= n_)
            throw std::invalid_argument("invalid node id " + std::to_string(i) +
                                        " (n=" + std::to_string(n_) + ")");
    }

private:
    DiGraph(int n, std::vector<Edge> edges, bool undirected,
            std::vector<std::string> labels)
        : n_(n), undirected_(undirected), labels_(std::move(labels)) {
        if (n < 2) throw std::invalid_argument("graph needs n >= 2");
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        out_.assign(static_cast<size_t>(n), {});
        in_.assign(static_cast<size_t>(n), {});
        for (const auto& [i, j] : edges) {
            if (i < 0 || i >= n || j < 0 || j >= n)
                throw std::invalid_argument("edge endpoint out of range");
            if (i == j) throw std::invalid_argument("self-loops are not allowed");
            out_[static_cast<size_t>(i)].push_back(j);
            in_[static_cast<size_t>(j)].push_back(i);
        }
        edges_ = std::move(edges);
        if (!labels_.empty()) {
            if (static_cast<int>(labels_.size()) != n)
                throw std::invalid_argument("label count must equal n");
            for (NodeId i = 0; i < n; ++i) {
                if (labels_[static_cast<size_t>(i)].empty()) continue;
                auto [it, fresh] = label_index_.emplace(labels_[static_cast<size_t>(i)], i);
                (void)it;
                if (!fresh) throw std::invalid_argument("duplicate node label");
            }
        }
    }

    int n_;
    bool undirected_;
    std::vector<std::vector<NodeId>> out_, in_;
    std::vector<Edge> edges_;
    std::vector<std::string> labels_;
    std::map<std::string, NodeId> label_index_;
};

// A labeled (L, C, R) split of the node set. Checkers require L and R
// non-empty; C may be empty.
struct Partition {
    NodeSet L, C, R;
};

inline bool operator==(const Partition& a, const Partition& b) {
    return a.L == b.L && a.C == b.C && a.R == b.R;
}

namespace detail {

// Backward BFS from i restricted to nodes outside `removed`, depth <= k.
// Returns every j != i with a directed path j -> ... -> i of length <= k
// avoiding `removed`.
inline NodeSet bounded_in_reach(const DiGraph& g, NodeId i, int k,
                                const NodeSet& removed) {
    std::vector<int> depth(static_cast<size_t>(g.size()), -1);
    depth[static_cast<size_t>(i)] = 0;
    std::queue<NodeId> q;
    q.push(i);
    NodeSet result;
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        if (depth[static_cast<size_t>(v)] == k) continue;
        for (NodeId u : g.in(v)) {
            if (u == i || removed.count(u)) continue;
            if (depth[static_cast<size_t>(u)] != -1) continue;
            depth[static_cast<size_t>(u)] = depth[static_cast<size_t>(v)] + 1;
            result.insert(u);
            q.push(u);
        }
    }
    return result;
}

}  // namespace detail

// N_i^-(k): all j != i with a directed path of length <= k from j to i.
// k = 1 gives the one-hop in-neighbor set.
inline NodeSet k_in_neighborhood(const DiGraph& g, NodeId i, int k) {
    g.check_node(i);
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    return detail::bounded_in_reach(g, i, k, {});
}

// k-hop in-neighborhood of i in the subgraph induced by V - F.
inline NodeSet reach_k(const DiGraph& g, NodeId i, const NodeSet& F, int k) {
    g.check_node(i);
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (F.count(i)) throw std::invalid_argument("reach_k: i must not be in F");
    return detail::bounded_in_reach(g, i, k, F);
}

// One-hop out-neighbors, as a set.
inline NodeSet out_neighbors(const DiGraph& g, NodeId i) {
    const auto& v = g.out(i);
    return NodeSet(v.begin(), v.end());
}

inline NodeSet in_neighbors(const DiGraph& g, NodeId i) {
    const auto& v = g.in(i);
    return NodeSet(v.begin(), v.end());
}

// In-neighbors of a node set: nodes outside B with an edge into B.
inline NodeSet set_in_neighbors(const DiGraph& g, const NodeSet& B) {
    NodeSet result;
    for (NodeId b : B)
        for (NodeId j : g.in(b))
            if (!B.count(j)) result.insert(j);
    return result;
}

namespace detail {

inline bool connected_ignoring(const DiGraph& g, const NodeSet& removed) {
    // Undirected connectivity of the induced subgraph on V - removed.
    std::vector<bool> seen(static_cast<size_t>(g.size()), false);
    NodeId start = -1;
    int remaining = 0;
    for (NodeId v = 0; v < g.size(); ++v) {
        if (removed.count(v)) continue;
        ++remaining;
        if (start == -1) start = v;
    }
    if (remaining <= 1) return true;
    std::queue<NodeId> q;
    q.push(start);
    seen[static_cast<size_t>(start)] = true;
    int visited = 1;
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        for (NodeId u : g.out(v)) {
            if (removed.count(u) || seen[static_cast<size_t>(u)]) continue;
            seen[static_cast<size_t>(u)] = true;
            ++visited;
            q.push(u);
        }
    }
    return visited == remaining;
}

template <typename Fn>
inline bool any_subset_of_size(const std::vector<NodeId>& pool, int size, Fn&& fn) {
    // Visits subsets in lexicographic order; fn returns true to stop early.
    std::vector<int> idx(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = i;
    if (size > static_cast<int>(pool.size())) return false;
    while (true) {
        NodeSet subset;
        for (int i : idx) subset.insert(pool[static_cast<size_t>(i)]);
        if (fn(subset)) return true;
        int pos = size - 1;
        while (pos >= 0 &&
               idx[static_cast<size_t>(pos)] == static_cast<int>(pool.size()) - size + pos)
            --pos;
        if (pos < 0) return false;
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < size; ++i)
            idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
    }
}

}  // namespace detail

// Minimum number of node removals that disconnect g; n-1 for complete graphs.
// Exhaustive over removal sets by increasing size — exact at desk scale.
inline int vertex_connectivity(const DiGraph& g) {
    if (!g.is_undirected())
        throw std::invalid_argument("vertex_connectivity requires an undirected graph");
    std::vector<NodeId> all;
    for (NodeId v = 0; v < g.size(); ++v) all.push_back(v);
    for (int s = 0; s <= g.size() - 2; ++s) {
        bool found = detail::any_subset_of_size(all, s, [&](const NodeSet& removed) {
            return !detail::connected_ignoring(g, removed);
        });
        if (found) return s;
    }
    return g.size() - 1;
}

}  // namespace wavg
