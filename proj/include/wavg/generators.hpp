#pragma once

// Topology generators: the bidirectional ring, complete graphs, the
// two-cliques-with-bridges family, the four-node ring-plus-chord used by the
// delay examples, and seeded random digraphs for the property corpora.

#include <random>

#include "wavg/graph.hpp"

namespace wavg {

namespace detail {

inline std::vector<std::string> letter_labels(int n, bool upper) {
    if (n > 26) return {};
    std::vector<std::string> labels;
    labels.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        labels.push_back(std::string(1, static_cast<char>((upper ? 'A' : 'a') + i)));
    return labels;
}

}  // namespace detail

// Bidirectional cycle 0-1-...-(n-1)-0. Nodes are labeled a, b, c, ... when
// n <= 26, so ring(4) is the a-b-c-d ring the witness examples refer to.
inline DiGraph ring(int n) {
    if (n < 2) throw std::invalid_argument("ring: n must be >= 2");
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return DiGraph::undirected(n, std::move(edges), detail::letter_labels(n, false));
}

inline DiGraph complete(int n) {
    if (n < 2) throw std::invalid_argument("complete: n must be >= 2");
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return DiGraph::undirected(n, std::move(edges));
}

// Two complete bidirectional cliques of size n/2 ({0..n/2-1} and {n/2..n-1})
// joined by a bidirectional matching of b bridge edges i <-> n/2+i, i < b.
inline DiGraph two_cliques(int n, int b) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("two_cliques: n must be even and >= 2");
    if (b < 1 || b > n / 2) throw std::invalid_argument("two_cliques: need 1 <= b <= n/2");
    const int half = n / 2;
    std::vector<Edge> edges;
    for (NodeId i = 0; i < half; ++i)
        for (NodeId j = i + 1; j < half; ++j) {
            edges.emplace_back(i, j);
            edges.emplace_back(half + i, half + j);
        }
    for (NodeId i = 0; i < b; ++i) edges.emplace_back(i, half + i);
    return DiGraph::undirected(n, std::move(edges));
}

// Nodes {A, B, C, D}; bidirectional edges A-B, A-C, C-D, B-D plus the single
// directed edge (C, B). 9 directed edges total.
inline DiGraph exampleG() {
    const NodeId A = 0, B = 1, C = 2, D = 3;
    std::vector<Edge> edges = {{A, B}, {B, A}, {A, C}, {C, A}, {C, D},
                               {D, C}, {B, D}, {D, B}, {C, B}};
    return DiGraph::directed(4, std::move(edges), detail::letter_labels(4, true));
}

// Each ordered pair (i, j), i != j, is included independently with
// probability p. The draw is a raw 32-bit threshold test on mt19937 output,
// so results are identical across platforms for a given seed.
inline DiGraph random_digraph(int n, double p, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random_digraph: n must be >= 2");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_digraph: need 0 <= p <= 1");
    std::mt19937 rng(static_cast<uint32_t>(seed));
    const uint64_t threshold = static_cast<uint64_t>(p * 4294967296.0);
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j) {
            if (i == j) continue;
            if (static_cast<uint64_t>(rng()) < threshold) edges.emplace_back(i, j);
        }
    return DiGraph::directed(n, std::move(edges));
}

// Symmetric closure of random_digraph(n, p, seed), flagged undirected.
inline DiGraph random_undirected(int n, double p, uint64_t seed) {
    DiGraph d = random_digraph(n, p, seed);
    return DiGraph::undirected(n, d.edges());
}

}  // namespace wavg
