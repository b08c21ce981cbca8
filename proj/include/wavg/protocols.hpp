#pragma once

// Per-node state machines for LocWA, k-LocWA, Strong k-LocWA, LWA and LBC,
// expressed as pure transition functions (init, message receive, update
// attempt) so the simulator can drive any of them interchangeably. Every
// function maps (state, event) to (new state, sends, phase change) and never
// touches shared state.
//
// Per asynchronous phase p, a node seeds R with its own value and heard with
// itself, sends its phase-(p-1) state out, collects first copies of peer
// values, and averages the multiset R the first time its protocol's WAIT
// predicate says no admissible set of <= f crashes can explain the still
// missing senders. k-hop protocols realize "send to N_i^+(k)" by local
// flooding with a hop counter; LWA floods (relay depth n) and piggybacks
// in-neighbor lists to grow a per-phase estimated graph; LBC first learns the
// whole node set through gossiped subgraphs, then runs the wait/average loop
// on the learned topology.

#include "wavg/graph.hpp"

namespace wavg {

enum class ProtoAlg { LocWA, KLocWA, StrongKLocWA, LWA, LBC };

struct ProtocolKind {
    ProtoAlg alg = ProtoAlg::LocWA;
    int k = 1;

    static ProtocolKind locwa() { return {ProtoAlg::LocWA, 1}; }
    static ProtocolKind klocwa(int k) { return {ProtoAlg::KLocWA, k}; }
    static ProtocolKind strong_klocwa(int k) { return {ProtoAlg::StrongKLocWA, k}; }
    static ProtocolKind lwa() { return {ProtoAlg::LWA, 1}; }
    static ProtocolKind lbc() { return {ProtoAlg::LBC, 1}; }

    bool hop_limited() const {
        return alg == ProtoAlg::KLocWA || alg == ProtoAlg::StrongKLocWA;
    }
    bool floods() const { return alg == ProtoAlg::LWA || alg == ProtoAlg::LBC; }
    int relay_depth(int n) const { return hop_limited() ? k : (floods() ? n : 1); }

    std::string name() const {
        switch (alg) {
            case ProtoAlg::LocWA: return "locwa";
            case ProtoAlg::KLocWA: return "klocwa";
            case ProtoAlg::StrongKLocWA: return "strong-klocwa";
            case ProtoAlg::LWA: return "lwa";
            case ProtoAlg::LBC: return "lbc";
        }
        return "?";
    }

    void validate(const DiGraph& g) const {
        if (hop_limited() && (k < 1 || k > g.size()))
            throw std::invalid_argument("protocol k must satisfy 1 <= k <= n");
        if (alg == ProtoAlg::LBC && !g.is_undirected())
            throw std::invalid_argument("LBC requires an undirected graph");
    }
};

enum class MsgKind { Value, Learn };

// Node/edge sets a node assembles from messages; not a full DiGraph because
// it grows incrementally and has no fixed node count.
struct LearnedGraph {
    NodeSet nodes;
    std::set<Edge> edges;

    bool merge(const LearnedGraph& other) {
        bool grew = false;
        for (NodeId v : other.nodes) grew |= nodes.insert(v).second;
        for (const Edge& e : other.edges) grew |= edges.insert(e).second;
        return grew;
    }
    // G_{N => i}: nodes N u {i}, one edge from each member of N to i;
    // symmetric variant also adds the reverse edges.
    void add_star(NodeId i, const NodeSet& in_nbrs, bool symmetric) {
        nodes.insert(i);
        for (NodeId j : in_nbrs) {
            nodes.insert(j);
            edges.insert({j, i});
            if (symmetric) edges.insert({i, j});
        }
    }
    bool subgraph_of(const DiGraph& g) const {
        for (NodeId v : nodes)
            if (v < 0 || v >= g.size()) return false;
        for (const Edge& e : edges)
            if (!g.has_edge(e.first, e.second)) return false;
        return true;
    }
    bool operator==(const LearnedGraph& o) const {
        return nodes == o.nodes && edges == o.edges;
    }
};

struct Message {
    MsgKind kind = MsgKind::Value;
    double value = 0.0;
    NodeSet in_nbrs;     // LWA value messages carry the source's N_i^-
    LearnedGraph graph;  // LBC learn messages carry a subgraph
    NodeId source = -1;
    int phase = 0;
    int hop_budget = 0;  // remaining relay hops; k-1 at origin for k-hop kinds
};

struct NodeState {
    NodeId id = -1;
    int phase = 0;  // 0 while LBC is learning; consensus phases start at 1
    double value = 0.0;
    std::vector<double> values;  // R: one value per heard node, arrival order
    NodeSet heard;
    LearnedGraph est;  // LWA: G^i[p]; LBC: G^i
    std::map<std::pair<NodeId, int>, int> forwarded;  // best relayed budget per (source, phase)
    std::set<std::pair<NodeId, int>> recorded;        // (source, phase) pairs absorbed/buffered
    std::vector<Message> buffered;                    // future-phase messages, arrival order
    bool crashed = false;
    bool learning = false;  // LBC learn phase active
};

struct PhaseCompletion {
    int phase = 0;
    double value = 0.0;
    NodeSet heard_frozen;  // heard set at the update instant
};

struct TransitionOutput {
    NodeState state;
    std::vector<std::pair<NodeId, Message>> sends;
    bool phase_advanced = false;
    std::optional<PhaseCompletion> completed;
    bool learn_finished = false;  // LBC: learn phase ended in this transition
};

// ---------------------------------------------------------------------------
// WAIT predicates
// ---------------------------------------------------------------------------

// Condition 1-WAIT: at most f one-hop in-neighbors unheard. heard's
// self-entry does not count toward the threshold.
inline bool wait_1(const DiGraph& g, NodeId i, const NodeSet& heard, int f) {
    int got = 0;
    for (NodeId j : g.in(i))
        if (heard.count(j)) ++got;
    return got >= static_cast<int>(g.in(i).size()) - f;
}

// Condition k-WAIT: some F subseteq N_i^-(k) with |F| <= f has
// reach_i^k(F) subseteq heard. Subsets are tried by increasing size.
inline bool wait_k(const DiGraph& g, NodeId i, const NodeSet& heard, int f, int k) {
    NodeSet nk = k_in_neighborhood(g, i, k);
    std::vector<NodeId> pool(nk.begin(), nk.end());
    for (int size = 0; size <= std::min<int>(f, static_cast<int>(pool.size())); ++size) {
        bool found = detail::any_subset_of_size(pool, size, [&](const NodeSet& F) {
            for (NodeId j : reach_k(g, i, F, k))
                if (!heard.count(j)) return false;
            return true;
        });
        if (found) return true;
    }
    return false;
}

// Strong k-LocWA update condition: any of 1-WAIT .. k-WAIT.
inline bool wait_strong(const DiGraph& g, NodeId i, const NodeSet& heard, int f, int k) {
    for (int j = 1; j <= k; ++j)
        if (wait_k(g, i, heard, f, j)) return true;
    return false;
}

namespace detail {

inline NodeSet est_reach(const LearnedGraph& est, NodeId i, const NodeSet& F) {
    // Unbounded backward reachability to i inside est minus F.
    std::map<NodeId, std::vector<NodeId>> in_of;
    for (const Edge& e : est.edges) in_of[e.second].push_back(e.first);
    NodeSet seen{i};
    std::vector<NodeId> stack{i};
    NodeSet result;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        auto it = in_of.find(v);
        if (it == in_of.end()) continue;
        for (NodeId u : it->second) {
            if (u == i || F.count(u) || seen.count(u)) continue;
            seen.insert(u);
            result.insert(u);
            stack.push_back(u);
        }
    }
    return result;
}

}  // namespace detail

// LWA wait: some F subseteq V(est) - {i} with |F| <= f such that every node
// with a directed path to i in est - F has been heard. Path length unbounded.
inline bool wait_lwa(const LearnedGraph& est, NodeId i, const NodeSet& heard, int f) {
    if (!est.nodes.count(i))
        throw std::invalid_argument("wait_lwa: estimated graph must contain i");
    std::vector<NodeId> pool;
    for (NodeId v : est.nodes)
        if (v != i) pool.push_back(v);
    for (int size = 0; size <= std::min<int>(f, static_cast<int>(pool.size())); ++size) {
        bool found = detail::any_subset_of_size(pool, size, [&](const NodeSet& F) {
            for (NodeId j : detail::est_reach(est, i, F))
                if (!heard.count(j)) return false;
            return true;
        });
        if (found) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Transitions
// ---------------------------------------------------------------------------

namespace detail {

inline void record_value(NodeState& s, const Message& m, const ProtocolKind& kind) {
    s.values.push_back(m.value);
    s.heard.insert(m.source);
    if (kind.alg == ProtoAlg::LWA) s.est.add_star(m.source, m.in_nbrs, false);
}

// Resets the per-phase state for s.phase, emits the phase value message, and
// replays messages buffered for this phase. Shared by init and phase entry.
inline void enter_phase(NodeState& s, const DiGraph& g, const ProtocolKind& kind,
                        TransitionOutput& out) {
    s.values = {s.value};
    s.heard = {s.id};
    // Dedup entries for phases already averaged are dead weight: stale
    // copies never mutate state, and a re-relayed stale copy dies within
    // its hop budget. Without this pruning long runs go quadratic.
    std::erase_if(s.recorded, [&](const auto& key) { return key.second < s.phase; });
    std::erase_if(s.forwarded, [&](const auto& kv) { return kv.first.second < s.phase; });
    s.recorded.insert({s.id, s.phase});
    // Own-origin copies must never be re-forwarded: a relay path through the
    // origin is never the only <=k-hop route to anyone.
    s.forwarded[{s.id, s.phase}] = g.size();

    Message m;
    m.kind = MsgKind::Value;
    m.value = s.value;
    m.source = s.id;
    m.phase = s.phase;
    m.hop_budget = kind.hop_limited() ? kind.k - 1 : 0;
    if (kind.alg == ProtoAlg::LWA) {
        m.in_nbrs = in_neighbors(g, s.id);
        s.est = LearnedGraph{};
        s.est.add_star(s.id, m.in_nbrs, false);  // reset to G_{N_i^- => i}
    }
    for (NodeId j : g.out(s.id)) out.sends.emplace_back(j, m);

    // A fast neighbor can already be a phase ahead; its messages were
    // buffered on arrival and take state effect now.
    std::vector<Message> keep;
    for (const Message& b : s.buffered) {
        if (b.phase == s.phase)
            record_value(s, b, kind);
        else
            keep.push_back(b);
    }
    s.buffered = std::move(keep);
}

inline void forward(NodeState& s, const DiGraph& g, const ProtocolKind& kind,
                    const Message& m, TransitionOutput& out) {
    if (kind.alg == ProtoAlg::LocWA) return;  // never forwards
    auto key = std::make_pair(m.source, m.phase);
    if (kind.hop_limited()) {
        if (m.hop_budget <= 0) return;
        auto it = s.forwarded.find(key);
        int best = (it == s.forwarded.end()) ? -1 : it->second;
        if (m.hop_budget - 1 <= best) return;
        s.forwarded[key] = m.hop_budget - 1;
        Message relay = m;
        relay.hop_budget = m.hop_budget - 1;
        for (NodeId j : g.out(s.id)) out.sends.emplace_back(j, relay);
    } else {
        // Flooding kinds forward every first-seen message unchanged.
        if (s.forwarded.count(key)) return;
        s.forwarded[key] = 0;
        for (NodeId j : g.out(s.id)) out.sends.emplace_back(j, m);
    }
}

inline void lbc_finish_learn(NodeState& s, const DiGraph& g, const ProtocolKind& kind,
                             TransitionOutput& out) {
    s.learning = false;
    s.phase = 1;
    out.learn_finished = true;
    out.phase_advanced = true;
    enter_phase(s, g, kind, out);
}

}  // namespace detail

// Initial transition at start of execution: non-LBC kinds enter phase 1; LBC
// builds the symmetrized one-hop star and broadcasts it (and can finish
// learning immediately when the star already covers all n nodes).
inline TransitionOutput protocol_init(const DiGraph& g, const ProtocolKind& kind,
                                      NodeId id, double input) {
    kind.validate(g);
    TransitionOutput out;
    NodeState s;
    s.id = id;
    s.value = input;
    if (kind.alg == ProtoAlg::LBC) {
        s.learning = true;
        s.phase = 0;
        s.est.add_star(id, in_neighbors(g, id), true);
        Message m;
        m.kind = MsgKind::Learn;
        m.graph = s.est;
        m.source = id;
        m.phase = 0;
        for (NodeId j : g.out(id)) out.sends.emplace_back(j, m);
        if (static_cast<int>(s.est.nodes.size()) == g.size())
            detail::lbc_finish_learn(s, g, kind, out);
    } else {
        s.phase = 1;
        detail::enter_phase(s, g, kind, out);
    }
    out.state = std::move(s);
    return out;
}

// Receipt of one message. Forwarding happens on first arrival regardless of
// the phase relation; state changes follow the phase rules (past: drop,
// current: record, future: buffer). Takes the state by value: callers that
// own it move it in, so the growing dedup structures are never copied.
inline TransitionOutput on_receive(NodeState state, const DiGraph& g,
                                   const ProtocolKind& kind, const Message& m) {
    TransitionOutput out;
    NodeState s = std::move(state);
    if (s.crashed) {
        out.state = std::move(s);
        return out;
    }

    if (m.kind == MsgKind::Learn) {
        if (kind.alg == ProtoAlg::LBC && s.learning) {
            bool grew = s.est.merge(m.graph);
            if (grew) {
                // Rebroadcast every growth — including the one that completes
                // the node set, or a neighbor still learning may never see it.
                Message relay;
                relay.kind = MsgKind::Learn;
                relay.graph = s.est;
                relay.source = s.id;
                relay.phase = 0;
                for (NodeId j : g.out(s.id)) out.sends.emplace_back(j, relay);
            }
            if (static_cast<int>(s.est.nodes.size()) == g.size())
                detail::lbc_finish_learn(s, g, kind, out);
        }
        out.state = std::move(s);
        return out;
    }

    detail::forward(s, g, kind, m, out);

    auto key = std::make_pair(m.source, m.phase);
    if (m.source != s.id && !s.recorded.count(key)) {
        if (m.phase == s.phase) {
            s.recorded.insert(key);
            detail::record_value(s, m, kind);
        } else if (m.phase > s.phase) {  // an LBC learner sits at phase 0
            s.recorded.insert(key);
            s.buffered.push_back(m);
        }
        // phase < s.phase: the receiver's phase state is already averaged;
        // relaying above is unaffected.
    }
    out.state = std::move(s);
    return out;
}

// Evaluates the protocol's WAIT condition; on satisfaction averages R,
// advances one phase and enters it. By-value state, as with on_receive.
inline TransitionOutput try_update(NodeState state, const DiGraph& g,
                                   const ProtocolKind& kind, int f) {
    TransitionOutput out;
    NodeState s = std::move(state);
    if (s.crashed || s.learning) {
        out.state = std::move(s);
        return out;
    }

    bool ready = false;
    switch (kind.alg) {
        case ProtoAlg::LocWA: ready = wait_1(g, s.id, s.heard, f); break;
        case ProtoAlg::KLocWA: ready = wait_k(g, s.id, s.heard, f, kind.k); break;
        case ProtoAlg::StrongKLocWA: ready = wait_strong(g, s.id, s.heard, f, kind.k); break;
        case ProtoAlg::LWA:
        case ProtoAlg::LBC: ready = wait_lwa(s.est, s.id, s.heard, f); break;
    }
    if (!ready) {
        out.state = std::move(s);
        return out;
    }

    if (s.values.size() != s.heard.size())
        throw std::logic_error("one value per heard node violated");
    double sum = 0.0;
    for (double v : s.values) sum += v;
    double mean = sum / static_cast<double>(s.values.size());
    // The exact mean lies in [min R, max R]; keep the float one there too.
    auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    mean = std::clamp(mean, *lo, *hi);

    out.completed = PhaseCompletion{s.phase, mean, s.heard};
    out.phase_advanced = true;
    s.value = mean;
    s.phase += 1;
    detail::enter_phase(s, g, kind, out);
    out.state = std::move(s);
    return out;
}

}  // namespace wavg
