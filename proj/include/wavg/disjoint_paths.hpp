#pragma once

// Bounded-length node-disjoint path packing. max_disjoint_bounded_paths is
// the primitive behind the relation "A ->_k B": the maximum number of
// directed paths, each of length <= k, each starting in A and ending at i,
// pairwise sharing no node except i. Intermediate nodes may be any nodes of
// the graph. Exact exponential backtracking over canonically ordered path
// sets with branch-and-bound; bounded-length disjoint paths has no known
// polynomial exact algorithm for general k, and everything here runs at desk
// scale (guarded at n <= 16 by default).

#include <cstdint>
#include <limits>

#include "wavg/graph.hpp"

namespace wavg {

constexpr int kDisjointPathsDefaultGuard = 16;

using Path = std::vector<NodeId>;

// All simple directed paths of length <= k that start at a node of A and end
// at i (i appears only as the final node). Sorted by length, then
// lexicographically — the canonical order the packing search relies on.
inline std::vector<Path> enumerate_bounded_paths(const DiGraph& g, const NodeSet& A,
                                                 NodeId i, int k) {
    g.check_node(i);
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (A.empty()) throw std::invalid_argument("A must be non-empty");
    if (A.count(i)) throw std::invalid_argument("i must not be in A");
    for (NodeId a : A) g.check_node(a);

    std::vector<Path> paths;
    Path current;
    std::vector<bool> on_path(static_cast<size_t>(g.size()), false);

    auto extend = [&](auto&& self, NodeId v) -> void {
        if (static_cast<int>(current.size()) > k) return;
        for (NodeId u : g.out(v)) {
            if (u == i) {
                Path p = current;
                p.push_back(i);
                paths.push_back(std::move(p));
                continue;
            }
            if (on_path[static_cast<size_t>(u)]) continue;
            if (static_cast<int>(current.size()) == k) continue;
            on_path[static_cast<size_t>(u)] = true;
            current.push_back(u);
            self(self, u);
            current.pop_back();
            on_path[static_cast<size_t>(u)] = false;
        }
    };

    for (NodeId a : A) {
        on_path[static_cast<size_t>(a)] = true;
        current.push_back(a);
        extend(extend, a);
        current.pop_back();
        on_path[static_cast<size_t>(a)] = false;
    }

    std::sort(paths.begin(), paths.end(), [](const Path& x, const Path& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return x < y;
    });
    return paths;
}

namespace detail {

inline uint64_t interior_mask(const Path& p) {
    // Every node except the shared endpoint i.
    uint64_t m = 0;
    for (size_t idx = 0; idx + 1 < p.size(); ++idx)
        m |= uint64_t{1} << p[idx];
    return m;
}

// Branch-and-bound over the canonical path order: at each index either take
// the path (if node-disjoint from everything taken) or skip it. `target`
// allows early exit once that many disjoint paths are known to exist.
inline int max_disjoint_search(const std::vector<Path>& paths, int target) {
    std::vector<uint64_t> masks;
    masks.reserve(paths.size());
    for (const auto& p : paths) masks.push_back(interior_mask(p));
    int best = 0;
    const int total = static_cast<int>(paths.size());

    auto rec = [&](auto&& self, int idx, uint64_t used, int count) -> bool {
        if (count > best) best = count;
        if (best >= target) return true;
        if (idx == total) return false;
        if (count + (total - idx) <= best) return false;
        for (int j = idx; j < total; ++j) {
            if (masks[static_cast<size_t>(j)] & used) continue;
            if (self(self, j + 1, used | masks[static_cast<size_t>(j)], count + 1))
                return true;
            if (count + (total - j - 1) <= best) break;
        }
        return false;
    };
    rec(rec, 0, 0, 0);
    return best;
}

}  // namespace detail

// Maximum cardinality of a set of directed paths, each of length <= k, each
// starting at a node of A and ending at i, pairwise sharing no node except i.
// Returns 0 if no path exists. `target`, when given, stops the search as soon
// as that many disjoint paths are found (the checkers only need >= f+1).
inline int max_disjoint_bounded_paths(const DiGraph& g, const NodeSet& A, NodeId i,
                                      int k,
                                      int guard = kDisjointPathsDefaultGuard,
                                      int target = std::numeric_limits<int>::max()) {
    if (g.size() > guard)
        throw std::invalid_argument(
            "max_disjoint_bounded_paths: n=" + std::to_string(g.size()) +
            " exceeds guard " + std::to_string(guard) + " (raise the guard to override)");
    if (g.size() > 64)
        throw std::invalid_argument("max_disjoint_bounded_paths: n > 64 unsupported");
    auto paths = enumerate_bounded_paths(g, A, i, k);
    if (paths.empty()) return 0;
    return detail::max_disjoint_search(paths, target);
}

}  // namespace wavg
