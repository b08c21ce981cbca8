#include "wavg/generators.hpp"
#include "wavg/protocols.hpp"

#include <gtest/gtest.h>

using namespace wavg;

namespace {

LearnedGraph full_ring4_est() {
    LearnedGraph est;
    DiGraph g = ring(4);
    for (NodeId i = 0; i < 4; ++i) est.add_star(i, in_neighbors(g, i), false);
    return est;
}

Message value_msg(NodeId source, int phase, double value, int budget) {
    Message m;
    m.kind = MsgKind::Value;
    m.source = source;
    m.phase = phase;
    m.value = value;
    m.hop_budget = budget;
    return m;
}

}  // namespace

TEST(WaitConditions, OneHop) {
    DiGraph eg = exampleG();
    EXPECT_TRUE(wait_1(eg, 3, {3, 2}, 1));   // D heard C, |N_D^-|=2, f=1
    EXPECT_FALSE(wait_1(ring(4), 0, {0}, 1));
    EXPECT_TRUE(wait_1(ring(4), 0, {0}, 2));  // f >= |N^-| is vacuous
}

TEST(WaitConditions, KHop) {
    DiGraph eg = exampleG();
    EXPECT_FALSE(wait_k(eg, 3, {3, 2}, 1, 2));        // D heard C only
    EXPECT_TRUE(wait_k(eg, 3, {3, 2, 0}, 1, 2));      // + A, cover F={B}
    EXPECT_TRUE(wait_k(eg, 3, {3, 0, 1, 2}, 1, 2));   // heard everyone, F empty
    EXPECT_FALSE(wait_k(ring(4), 0, {0}, 1, 2));
}

TEST(WaitConditions, StrongIsTheDisjunction) {
    DiGraph eg = exampleG();
    EXPECT_TRUE(wait_strong(eg, 3, {3, 2}, 1, 2));  // 1-WAIT already holds
    EXPECT_FALSE(wait_strong(ring(4), 0, {0}, 1, 2));
    for (NodeId i = 0; i < 4; ++i)
        if (wait_k(eg, i, {i, 2}, 1, 2)) {
            EXPECT_TRUE(wait_strong(eg, i, {i, 2}, 1, 2));
        }
}

TEST(WaitConditions, LwaOnEstimatedGraphs) {
    DiGraph g = ring(4);
    LearnedGraph star;
    star.add_star(0, in_neighbors(g, 0), false);
    EXPECT_TRUE(wait_lwa(star, 0, {0}, 2));   // f covers both known in-neighbors
    EXPECT_FALSE(wait_lwa(star, 0, {0}, 1));

    LearnedGraph full = full_ring4_est();
    EXPECT_TRUE(wait_lwa(full, 0, {0, 1, 2, 3}, 1));
    EXPECT_FALSE(wait_lwa(full, 0, {0, 1}, 1));  // no single F cuts both c and d
    EXPECT_THROW(wait_lwa(LearnedGraph{}, 0, {0}, 1), std::invalid_argument);
}

TEST(Transitions, InitLocWaSendsToOutNeighbors) {
    auto out = protocol_init(ring(4), ProtocolKind::locwa(), 0, 0.0);
    EXPECT_EQ(out.state.phase, 1);
    EXPECT_EQ(out.state.values, std::vector<double>{0.0});
    EXPECT_EQ(out.state.heard, NodeSet{0});
    NodeSet recipients;
    for (const auto& [to, m] : out.sends) {
        recipients.insert(to);
        EXPECT_EQ(m.source, 0);
        EXPECT_EQ(m.phase, 1);
        EXPECT_EQ(m.value, 0.0);
        EXPECT_EQ(m.hop_budget, 0);
    }
    EXPECT_EQ(recipients, (NodeSet{1, 3}));
}

TEST(Transitions, InitKhopBudgetAndLwaPiggyback) {
    auto khop = protocol_init(exampleG(), ProtocolKind::klocwa(2), 3, 0.5);
    NodeSet recipients;
    for (const auto& [to, m] : khop.sends) {
        recipients.insert(to);
        EXPECT_EQ(m.hop_budget, 1);
    }
    EXPECT_EQ(recipients, (NodeSet{1, 2}));  // D's out-neighbors B, C

    auto lwa = protocol_init(exampleG(), ProtocolKind::lwa(), 3, 0.5);
    for (const auto& [to, m] : lwa.sends)
        EXPECT_EQ(m.in_nbrs, in_neighbors(exampleG(), 3));
    EXPECT_EQ(lwa.state.est.nodes, (NodeSet{1, 2, 3}));
    EXPECT_TRUE(lwa.state.est.edges.count({1, 3}));
    EXPECT_TRUE(lwa.state.est.edges.count({2, 3}));
}

TEST(Transitions, DuplicateCopiesLeaveStateUnchanged) {
    DiGraph g = ring(4);
    auto s = protocol_init(g, ProtocolKind::locwa(), 0, 0.0).state;
    auto first = on_receive(s, g, ProtocolKind::locwa(), value_msg(1, 1, 0.7, 0));
    EXPECT_EQ(first.state.values, (std::vector<double>{0.0, 0.7}));
    EXPECT_EQ(first.state.heard, (NodeSet{0, 1}));
    auto second =
        on_receive(first.state, g, ProtocolKind::locwa(), value_msg(1, 1, 0.7, 0));
    EXPECT_EQ(second.state.values, first.state.values);
    EXPECT_EQ(second.state.heard, first.state.heard);
    EXPECT_TRUE(second.sends.empty());
}

TEST(Transitions, RelayBudgets) {
    DiGraph g = ring(4);
    ProtocolKind k3 = ProtocolKind::klocwa(3);
    auto s = protocol_init(g, k3, 0, 0.0).state;

    auto r1 = on_receive(s, g, k3, value_msg(2, 1, 0.5, 1));
    ASSERT_FALSE(r1.sends.empty());
    for (const auto& [to, m] : r1.sends) EXPECT_EQ(m.hop_budget, 0);

    // A better copy arrives later along a shorter route: forwarded again.
    auto r2 = on_receive(r1.state, g, k3, value_msg(2, 1, 0.5, 2));
    ASSERT_FALSE(r2.sends.empty());
    for (const auto& [to, m] : r2.sends) EXPECT_EQ(m.hop_budget, 1);
    // value still recorded exactly once
    EXPECT_EQ(r2.state.values, (std::vector<double>{0.0, 0.5}));

    // No remaining budget: never forwarded.
    auto r3 = on_receive(r2.state, g, k3, value_msg(3, 1, 0.5, 0));
    EXPECT_TRUE(r3.sends.empty());

    // LocWA never forwards anything.
    auto s1 = protocol_init(g, ProtocolKind::locwa(), 0, 0.0).state;
    auto r4 = on_receive(s1, g, ProtocolKind::locwa(), value_msg(2, 1, 0.5, 5));
    EXPECT_TRUE(r4.sends.empty());
}

TEST(Transitions, StaleMessagesRelayButDoNotMutate) {
    DiGraph g = ring(4);
    ProtocolKind k2 = ProtocolKind::klocwa(2);
    auto s = protocol_init(g, k2, 0, 0.0).state;
    s.phase = 3;
    s.values = {0.0};
    s.heard = {0};
    auto r = on_receive(s, g, k2, value_msg(2, 1, 0.9, 1));
    EXPECT_EQ(r.state.values, std::vector<double>{0.0});
    EXPECT_EQ(r.state.heard, NodeSet{0});
    EXPECT_FALSE(r.sends.empty());  // relaying is the source's prerogative
}

TEST(Transitions, FutureMessagesBufferAndReplayOnPhaseEntry) {
    DiGraph g = ring(4);
    ProtocolKind locwa = ProtocolKind::locwa();
    auto s = protocol_init(g, locwa, 0, 0.25).state;

    auto buf = on_receive(s, g, locwa, value_msg(1, 2, 0.75, 0));
    EXPECT_EQ(buf.state.heard, NodeSet{0});
    ASSERT_EQ(buf.state.buffered.size(), 1u);

    auto now = on_receive(buf.state, g, locwa, value_msg(3, 1, 0.75, 0));
    auto upd = try_update(now.state, g, locwa, 1);
    ASSERT_TRUE(upd.phase_advanced);
    ASSERT_TRUE(upd.completed.has_value());
    EXPECT_EQ(upd.completed->phase, 1);
    EXPECT_DOUBLE_EQ(upd.completed->value, 0.5);
    // entering phase 2 replayed the buffered message from node 1
    EXPECT_EQ(upd.state.phase, 2);
    EXPECT_EQ(upd.state.heard, (NodeSet{0, 1}));
    EXPECT_EQ(upd.state.values, (std::vector<double>{0.5, 0.75}));
    EXPECT_TRUE(upd.state.buffered.empty());
}

TEST(Transitions, UpdateAveragesTheMultiset) {
    DiGraph g = ring(4);
    ProtocolKind locwa = ProtocolKind::locwa();
    auto s = protocol_init(g, locwa, 0, 1.0).state;
    auto r1 = on_receive(s, g, locwa, value_msg(1, 1, 2.0, 0));
    auto r2 = on_receive(r1.state, g, locwa, value_msg(3, 1, 3.0, 0));
    auto upd = try_update(r2.state, g, locwa, 1);
    ASSERT_TRUE(upd.phase_advanced);
    EXPECT_DOUBLE_EQ(upd.completed->value, 2.0);

    // hearing only yourself leaves the value unchanged
    auto lone = protocol_init(g, locwa, 0, 0.625).state;
    auto vac = try_update(lone, g, locwa, 2);  // f >= |N^-|: vacuous wait
    ASSERT_TRUE(vac.phase_advanced);
    EXPECT_DOUBLE_EQ(vac.completed->value, 0.625);
}

TEST(Transitions, NotReadyAndCrashedAreNoOps) {
    DiGraph g = ring(4);
    auto s = protocol_init(g, ProtocolKind::locwa(), 0, 0.0).state;
    auto idle = try_update(s, g, ProtocolKind::locwa(), 1);
    EXPECT_FALSE(idle.phase_advanced);
    EXPECT_TRUE(idle.sends.empty());

    s.crashed = true;
    auto r = on_receive(s, g, ProtocolKind::locwa(), value_msg(1, 1, 0.5, 0));
    EXPECT_TRUE(r.sends.empty());
    EXPECT_EQ(r.state.heard, NodeSet{0});
    auto u = try_update(s, g, ProtocolKind::locwa(), 1);
    EXPECT_FALSE(u.phase_advanced);
}

TEST(Transitions, LwaGrowsTheEstimatedGraph) {
    DiGraph g = exampleG();
    ProtocolKind lwa = ProtocolKind::lwa();
    auto s = protocol_init(g, lwa, 3, 0.0).state;
    Message m = value_msg(2, 1, 0.5, 0);
    m.in_nbrs = in_neighbors(g, 2);  // C's in-neighbors {A, D}
    auto r = on_receive(s, g, lwa, m);
    EXPECT_TRUE(r.state.est.nodes.count(0));
    EXPECT_TRUE(r.state.est.edges.count({0, 2}));
    EXPECT_TRUE(r.state.est.edges.count({3, 2}));
    EXPECT_TRUE(r.state.est.subgraph_of(g));
    EXPECT_FALSE(r.sends.empty());  // flooding forwards first-seen copies
}

TEST(Lbc, InitBuildsSymmetricStarAndGossips) {
    DiGraph g = ring(4);
    auto out = protocol_init(g, ProtocolKind::lbc(), 0, 0.0);
    EXPECT_TRUE(out.state.learning);
    EXPECT_EQ(out.state.phase, 0);
    EXPECT_EQ(out.state.est.nodes, (NodeSet{0, 1, 3}));
    EXPECT_TRUE(out.state.est.edges.count({1, 0}));
    EXPECT_TRUE(out.state.est.edges.count({0, 1}));
    ASSERT_EQ(out.sends.size(), 2u);
    EXPECT_EQ(out.sends[0].second.kind, MsgKind::Learn);

    EXPECT_THROW(protocol_init(exampleG(), ProtocolKind::lbc(), 0, 0.0),
                 std::invalid_argument);
}

TEST(Lbc, LearnCompletesOnFullNodeSetAndRebroadcasts) {
    DiGraph g = ring(4);
    auto s = protocol_init(g, ProtocolKind::lbc(), 0, 0.25).state;
    Message learn;
    learn.kind = MsgKind::Learn;
    learn.source = 1;
    LearnedGraph star1;
    star1.add_star(1, in_neighbors(g, 1), true);  // brings node 2 into view
    learn.graph = star1;
    auto r = on_receive(s, g, ProtocolKind::lbc(), learn);
    EXPECT_FALSE(r.state.learning);
    EXPECT_TRUE(r.learn_finished);
    EXPECT_EQ(r.state.phase, 1);
    bool saw_learn = false, saw_value = false;
    for (const auto& [to, m] : r.sends) {
        saw_learn |= m.kind == MsgKind::Learn;
        saw_value |= m.kind == MsgKind::Value;
    }
    EXPECT_TRUE(saw_learn);  // the completing union is still rebroadcast
    EXPECT_TRUE(saw_value);  // and the consensus phase begins

    // duplicate of the same learn message after completion: ignored
    auto again = on_receive(r.state, g, ProtocolKind::lbc(), learn);
    EXPECT_TRUE(again.sends.empty());
}

TEST(Lbc, TwoNodeLearnIsImmediate) {
    DiGraph pair = DiGraph::undirected(2, {{0, 1}});
    auto out = protocol_init(pair, ProtocolKind::lbc(), 0, 0.0);
    EXPECT_TRUE(out.learn_finished);
    EXPECT_FALSE(out.state.learning);
}

TEST(ProtocolKind, Validation) {
    EXPECT_THROW(ProtocolKind::klocwa(0).validate(ring(4)), std::invalid_argument);
    EXPECT_THROW(ProtocolKind::klocwa(5).validate(ring(4)), std::invalid_argument);
    EXPECT_NO_THROW(ProtocolKind::klocwa(4).validate(ring(4)));
    EXPECT_EQ(ProtocolKind::lwa().relay_depth(7), 7);
    EXPECT_EQ(ProtocolKind::locwa().relay_depth(7), 1);
    EXPECT_EQ(ProtocolKind::strong_klocwa(3).relay_depth(7), 3);
}
