#pragma once

// Exact checkers for the feasibility conditions on directed graphs:
//
//   arrow(A, B, f)      some node of B has >= f+1 one-hop in-neighbors in A
//   arrow_k(A, B, f, k) some node of B is the endpoint of >= f+1 node-disjoint
//                       directed paths of length <= k originating in A
//   check_kcca          for every partition (L, C, R) with L, R non-empty,
//                       L u C ->_k R or R u C ->_k L
//   check_cca           same disjunction with the set-level in-neighbor count
//   propagates          the deterministic absorption sequence A_{t+1} =
//                       A_t u in(A_t ->_k B_t)
//   oracle_kcca         an independent re-derivation of check_kcca used for
//                       cross-verification (no pruning, separate path search)
//
// Partition enumeration assigns each node a digit in {L, C, R}, node 0 most
// significant, and scans assignments in lexicographic order; a false verdict
// carries the first violating partition, so witnesses are reproducible.

#include "wavg/disjoint_paths.hpp"
#include "wavg/graph.hpp"

namespace wavg {

struct Verdict {
    bool holds = true;
    int k = 0;  // relay depth checked; n for Condition CCA
    int f = 0;
    std::optional<Partition> witness;  // present iff !holds
};

namespace detail {

inline void check_arrow_args(const NodeSet& A, const NodeSet& B) {
    if (A.empty() || B.empty())
        throw std::invalid_argument("arrow: A and B must be non-empty");
    for (NodeId b : B)
        if (A.count(b)) throw std::invalid_argument("arrow: A and B must be disjoint");
}

// Memoizes "A reaches i with >= need disjoint <=k-paths" across the many
// partitions a single checker call scans.
class DisjointReachCache {
public:
    DisjointReachCache(const DiGraph& g, int k, int need, int guard)
        : g_(g), k_(k), need_(need), guard_(guard) {}

    bool reaches(const NodeSet& A, NodeId i) {
        auto key = std::make_pair(A, i);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool ok = max_disjoint_bounded_paths(g_, A, i, k_, guard_, need_) >= need_;
        memo_.emplace(std::move(key), ok);
        return ok;
    }

private:
    const DiGraph& g_;
    int k_, need_, guard_;
    std::map<std::pair<NodeSet, NodeId>, bool> memo_;
};

}  // namespace detail

// A -> B: some node of B has at least f+1 distinct one-hop in-neighbors in A.
inline bool arrow(const DiGraph& g, const NodeSet& A, const NodeSet& B, int f) {
    detail::check_arrow_args(A, B);
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    for (NodeId i : B) {
        int count = 0;
        for (NodeId j : g.in(i))
            if (A.count(j)) ++count;
        if (count >= f + 1) return true;
    }
    return false;
}

// A ->_k B via the bounded disjoint-path packing; arrow_k with k = 1
// coincides with arrow.
inline bool arrow_k(const DiGraph& g, const NodeSet& A, const NodeSet& B, int f,
                    int k, int guard = kDisjointPathsDefaultGuard) {
    detail::check_arrow_args(A, B);
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    for (NodeId i : B)
        if (max_disjoint_bounded_paths(g, A, i, k, guard, f + 1) >= f + 1) return true;
    return false;
}

// in(A ->_k B): the nodes of B with >= f+1 disjoint <=k-paths from A.
inline NodeSet in_set_k(const DiGraph& g, const NodeSet& A, const NodeSet& B, int f,
                        int k, int guard = kDisjointPathsDefaultGuard) {
    detail::check_arrow_args(A, B);
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    NodeSet result;
    for (NodeId i : B)
        if (max_disjoint_bounded_paths(g, A, i, k, guard, f + 1) >= f + 1)
            result.insert(i);
    return result;
}

namespace detail {

// Scans node->{L,C,R} assignments in lexicographic order (digits 0=L, 1=C,
// 2=R, last node varies fastest). `canonical_only` halves the work by
// skipping assignments whose first non-C digit is R: the L/R swap of such an
// assignment was already visited, and the disjunction is symmetric under the
// swap, so the first violation found is still the overall lexicographic
// first. Visitor returns true iff the partition violates the condition.
template <typename Violates>
inline std::optional<Partition> scan_partitions(int n, bool canonical_only,
                                                Violates&& violates) {
    std::vector<int> digit(static_cast<size_t>(n), 0);
    while (true) {
        bool has_L = false, has_R = false;
        int first_non_c = 1;
        for (int d : digit) {
            if (d == 0) has_L = true;
            if (d == 2) has_R = true;
            if (first_non_c == 1 && d != 1) first_non_c = d;
        }
        bool skip = !has_L || !has_R || (canonical_only && first_non_c == 2);
        if (!skip) {
            Partition p;
            for (NodeId v = 0; v < n; ++v) {
                int d = digit[static_cast<size_t>(v)];
                (d == 0 ? p.L : d == 1 ? p.C : p.R).insert(v);
            }
            if (violates(p)) return p;
        }
        int pos = n - 1;
        while (pos >= 0 && digit[static_cast<size_t>(pos)] == 2) {
            digit[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) return std::nullopt;
        ++digit[static_cast<size_t>(pos)];
    }
}

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet r = a;
    r.insert(b.begin(), b.end());
    return r;
}

}  // namespace detail

// Condition k-CCA. A false verdict carries the lexicographically first
// violating partition.
inline Verdict check_kcca(const DiGraph& g, int f, int k,
                          int guard = kDisjointPathsDefaultGuard) {
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    detail::DisjointReachCache cache(g, k, f + 1, guard);
    auto violating = [&](const Partition& p) {
        auto reaches_into = [&](const NodeSet& A, const NodeSet& B) {
            for (NodeId i : B)
                if (cache.reaches(A, i)) return true;
            return false;
        };
        return !reaches_into(detail::set_union(p.L, p.C), p.R) &&
               !reaches_into(detail::set_union(p.R, p.C), p.L);
    };
    Verdict v;
    v.k = k;
    v.f = f;
    v.witness = detail::scan_partitions(g.size(), /*canonical_only=*/true, violating);
    v.holds = !v.witness.has_value();
    return v;
}

// Condition CCA: for every partition, R has >= f+1 distinct incoming
// neighbors in L u C, or symmetrically for L. Set-level in-neighbors, unlike
// the per-node arrow relation.
inline Verdict check_cca(const DiGraph& g, int f) {
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    auto point = [&](const NodeSet& A, const NodeSet& B) {
        NodeSet in = set_in_neighbors(g, B);
        int count = 0;
        for (NodeId j : in)
            if (A.count(j)) ++count;
        return count >= f + 1;
    };
    auto violating = [&](const Partition& p) {
        return !point(detail::set_union(p.L, p.C), p.R) &&
               !point(detail::set_union(p.R, p.C), p.L);
    };
    Verdict v;
    v.k = g.size();
    v.f = f;
    v.witness = detail::scan_partitions(g.size(), /*canonical_only=*/true, violating);
    v.holds = !v.witness.has_value();
    return v;
}

// One propagation sequence: steps[t] = (A_t, B_t) from (A, B) down to
// (A u B, {}). l() is the step count.
struct PropagationSequence {
    std::vector<std::pair<NodeSet, NodeSet>> steps;
    int l() const { return static_cast<int>(steps.size()) - 1; }
};

// Follows the uniquely determined absorption sequence. Returns the sequence
// if B is exhausted, nullopt if it stalls (in(A_t ->_k B_t) empty while B_t
// is non-empty).
inline std::optional<PropagationSequence> propagates(
    const DiGraph& g, const NodeSet& A, const NodeSet& B, int f, int k,
    int guard = kDisjointPathsDefaultGuard) {
    if (A.empty() || B.empty())
        throw std::invalid_argument("propagates: A and B must be non-empty");
    NodeSet all = detail::set_union(A, B);
    if (static_cast<int>(all.size()) != static_cast<int>(A.size() + B.size()) ||
        static_cast<int>(all.size()) != g.size())
        throw std::invalid_argument("propagates: A, B must partition the node set");

    PropagationSequence seq;
    NodeSet At = A, Bt = B;
    seq.steps.emplace_back(At, Bt);
    while (!Bt.empty()) {
        NodeSet absorbed = in_set_k(g, At, Bt, f, k, guard);
        if (absorbed.empty()) return std::nullopt;
        for (NodeId v : absorbed) {
            At.insert(v);
            Bt.erase(v);
        }
        seq.steps.emplace_back(At, Bt);
    }
    return seq;
}

namespace detail {

// Independent path machinery for the oracle: backward DFS from i (the main
// implementation searches forward from A), and a plain include/skip recursion
// over unordered path lists with no bounding and no early exit.
inline std::vector<Path> oracle_enumerate_paths(const DiGraph& g, const NodeSet& A,
                                                NodeId i, int k) {
    std::vector<Path> paths;
    std::vector<NodeId> rev{i};
    std::vector<bool> used(static_cast<size_t>(g.size()), false);
    used[static_cast<size_t>(i)] = true;
    auto walk = [&](auto&& self, NodeId v, int len) -> void {
        for (NodeId u : g.in(v)) {
            if (used[static_cast<size_t>(u)]) continue;
            rev.push_back(u);
            if (A.count(u)) paths.emplace_back(rev.rbegin(), rev.rend());
            if (len + 1 < k) {
                used[static_cast<size_t>(u)] = true;
                self(self, u, len + 1);
                used[static_cast<size_t>(u)] = false;
            }
            rev.pop_back();
        }
    };
    walk(walk, i, 0);
    return paths;
}

inline int oracle_max_disjoint(const DiGraph& g, const NodeSet& A, NodeId i, int k) {
    auto paths = oracle_enumerate_paths(g, A, i, k);
    int best = 0;
    auto rec = [&](auto&& self, size_t idx, const NodeSet& used, int count) -> void {
        if (count > best) best = count;
        if (idx == paths.size()) return;
        self(self, idx + 1, used, count);  // skip
        const Path& p = paths[idx];
        for (size_t j = 0; j + 1 < p.size(); ++j)
            if (used.count(p[j])) return;
        NodeSet next = used;
        for (size_t j = 0; j + 1 < p.size(); ++j) next.insert(p[j]);
        self(self, idx + 1, next, count + 1);
    };
    rec(rec, 0, {}, 0);
    return best;
}

}  // namespace detail

// Re-derives check_kcca by a structurally different route; must agree with it.
// Guarded at n <= 10.
inline Verdict oracle_kcca(const DiGraph& g, int f, int k) {
    if (g.size() > 10) throw std::invalid_argument("oracle_kcca: guard is n <= 10");
    if (f < 0) throw std::invalid_argument("f must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::map<std::pair<NodeSet, NodeId>, int> memo;
    auto max_disjoint = [&](const NodeSet& A, NodeId i) {
        auto key = std::make_pair(A, i);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        int v = detail::oracle_max_disjoint(g, A, i, k);
        memo.emplace(std::move(key), v);
        return v;
    };
    auto violating = [&](const Partition& p) {
        auto reaches_into = [&](const NodeSet& A, const NodeSet& B) {
            for (NodeId i : B)
                if (max_disjoint(A, i) >= f + 1) return true;
            return false;
        };
        return !reaches_into(detail::set_union(p.L, p.C), p.R) &&
               !reaches_into(detail::set_union(p.R, p.C), p.L);
    };
    Verdict v;
    v.k = k;
    v.f = f;
    v.witness = detail::scan_partitions(g.size(), /*canonical_only=*/false, violating);
    v.holds = !v.witness.has_value();
    return v;
}

}  // namespace wavg
