#pragma once

// Deterministic discrete-event engine. Time is discretized into rounds;
// asynchrony is the adversary's choice of integer per-message delays. Each
// round the engine delivers every message scheduled for it (ordered by
// (send round, source, recipient, relayer, phase, sequence)), lets every
// node attempt one update, and applies crash events. A node crashing at
// round r still takes its round-r step, but only its sends to the event's
// final_recipients survive — the fail-stop mid-broadcast case. Identical
// configs produce bit-identical traces.
//
// The engine asserts two protocol invariants while running and aborts with a
// diagnostic on violation: every updated value stays inside the initial
// input range, and (for the LWA-style kinds) the heard sets frozen at update
// instants pairwise intersect per phase, with the estimated graph a subgraph
// of the real one.

#include "wavg/scenario.hpp"

namespace wavg {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MsgStatus { Delivered, RecipientCrashed, Pending };

struct MsgRecord {
    long send_round = 0;
    long deliver_round = -1;
    NodeId from = -1, to = -1, source = -1;
    int phase = 0;
    MsgKind kind = MsgKind::Value;
    MsgStatus status = MsgStatus::Pending;
    bool recorded = false;  // delivery mutated recipient protocol state
};

struct PhaseRecord {
    NodeId node = -1;
    int phase = 0;
    double value = 0.0;
    long round = 0;
    NodeSet heard;  // frozen at the update instant
};

struct CrashRecord {
    NodeId node = -1;
    long round = 0;
    NodeSet final_recipients;
};

struct LearnRecord {  // LBC: learn phase completed
    NodeId node = -1;
    long round = 0;
};

struct Trace {
    SimConfig config;
    std::vector<MsgRecord> messages;
    std::vector<PhaseRecord> phases;    // completion order
    std::vector<CrashRecord> crashes;
    std::vector<LearnRecord> learns;
    long rounds = 0;       // rounds actually executed
    bool converged = false;
    std::optional<int> p_epsilon;  // first settled phase with gap <= epsilon
    long stop_round = 0;

    // Lookup views built during the run.
    std::map<std::pair<NodeId, int>, double> value_of;        // includes phase 0 inputs
    std::map<std::pair<NodeId, int>, long> completion_round;
    std::map<std::pair<NodeId, int>, NodeSet> heard_star;
    int max_completed_phase = 0;
    int max_settled_phase = 0;  // all phases <= this have every live node past them

    double value(NodeId i, int p) const { return value_of.at({i, p}); }
    bool has_value(NodeId i, int p) const { return value_of.count({i, p}) > 0; }

    // U[p] - mu[p] over the nodes with a recorded value at phase p.
    std::optional<double> gap(int p) const {
        bool any = false;
        double lo = 0, hi = 0;
        for (const auto& [key, v] : value_of) {
            if (key.second != p) continue;
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!any) return std::nullopt;
        return hi - lo;
    }
};

namespace detail {

struct InFlight {
    long send_round = 0;
    NodeId from = -1, to = -1;
    long seq = 0;       // global emission order, the final tie-breaker
    size_t record = 0;  // index into Trace::messages
    Message msg;
};

inline bool deliver_order(const InFlight& a, const InFlight& b) {
    auto key = [](const InFlight& m) {
        return std::make_tuple(m.send_round, m.msg.source, m.to, m.from, m.msg.phase, m.seq);
    };
    return key(a) < key(b);
}

}  // namespace detail

inline Trace run(const SimConfig& config) {
    config.validate();
    const DiGraph& g = config.g;
    const int n = g.size();
    const ProtocolKind kind = config.kind;

    Trace trace;
    trace.config = config;

    const double u0 = *std::max_element(config.inputs.begin(), config.inputs.end());
    const double mu0 = *std::min_element(config.inputs.begin(), config.inputs.end());
    for (NodeId i = 0; i < n; ++i)
        trace.value_of[{i, 0}] = config.inputs[static_cast<size_t>(i)];

    std::vector<NodeState> states;
    states.reserve(static_cast<size_t>(n));

    std::map<NodeId, const CrashEvent*> crash_at;  // node -> its event
    for (const auto& ev : config.crashes) crash_at[ev.node] = &ev;

    std::map<long, std::vector<detail::InFlight>> pending;
    long seq = 0;

    auto schedule = [&](NodeId from, long round, const std::vector<std::pair<NodeId, Message>>& sends,
                        const NodeSet* surviving) {
        for (const auto& [to, msg] : sends) {
            if (surviving && !surviving->count(to)) continue;  // lost in the crash
            int d = config.delays.delay({from, to}, round, msg.phase);
            if (d < 1) throw SimError("delay scenario produced a delay < 1");
            detail::InFlight m;
            m.send_round = round;
            m.from = from;
            m.to = to;
            m.seq = seq++;
            m.record = trace.messages.size();
            m.msg = msg;
            MsgRecord rec;
            rec.send_round = round;
            rec.from = from;
            rec.to = to;
            rec.source = msg.source;
            rec.phase = msg.phase;
            rec.kind = msg.kind;
            trace.messages.push_back(rec);
            pending[round + d].push_back(std::move(m));
        }
    };

    auto heard_intersection_check = [&](NodeId node, const PhaseRecord& just) {
        if (!kind.floods()) return;
        for (const auto& [key, other] : trace.heard_star) {
            if (key.second != just.phase || key.first == node) continue;
            bool meets = false;
            for (NodeId h : just.heard)
                if (other.count(h)) {
                    meets = true;
                    break;
                }
            if (!meets)
                throw SimError("heard-set intersection violated at phase " +
                               std::to_string(just.phase) + ": nodes " + g.display(node) +
                               " and " + g.display(key.first) + " share no heard sender");
        }
    };

    std::map<int, std::pair<double, double>> phase_range;  // incremental U[p], mu[p]
    auto note_completion = [&](NodeId node, const PhaseCompletion& done, long round) {
        if (done.value < mu0 || done.value > u0)
            throw SimError("validity violated: node " + g.display(node) + " phase " +
                           std::to_string(done.phase) + " value " + std::to_string(done.value));
        PhaseRecord rec{node, done.phase, done.value, round, done.heard_frozen};
        heard_intersection_check(node, rec);
        trace.phases.push_back(rec);
        trace.value_of[{node, done.phase}] = done.value;
        trace.completion_round[{node, done.phase}] = round;
        trace.heard_star[{node, done.phase}] = done.heard_frozen;
        trace.max_completed_phase = std::max(trace.max_completed_phase, done.phase);
        auto [it, fresh] = phase_range.try_emplace(done.phase, done.value, done.value);
        if (!fresh) {
            it->second.first = std::min(it->second.first, done.value);
            it->second.second = std::max(it->second.second, done.value);
        }
    };

    auto est_check = [&](const NodeState& s) {
        if (kind.floods() && !s.est.subgraph_of(g))
            throw SimError("estimated graph is not a subgraph of the real topology at node " +
                           g.display(s.id));
    };

    // Round 0: every node starts phase 1 (LBC: its learn phase).
    {
        for (NodeId i = 0; i < n; ++i) {
            auto out = protocol_init(g, kind, i, config.inputs[static_cast<size_t>(i)]);
            const CrashEvent* ev = nullptr;
            if (auto it = crash_at.find(i); it != crash_at.end() && it->second->round == 0)
                ev = it->second;
            schedule(i, 0, out.sends, ev ? &ev->final_recipients : nullptr);
            if (out.learn_finished) trace.learns.push_back({i, 0});
            est_check(out.state);
            states.push_back(std::move(out.state));
        }
        for (const auto& [node, ev] : crash_at)
            if (ev->round == 0) {
                states[static_cast<size_t>(node)].crashed = true;
                trace.crashes.push_back({node, 0, ev->final_recipients});
            }
    }

    auto settled = [&]() {
        // Largest p every live node has completed; with no live nodes left,
        // everything recorded is settled.
        int p = std::numeric_limits<int>::max();
        bool any_live = false;
        for (NodeId i = 0; i < n; ++i) {
            if (states[static_cast<size_t>(i)].crashed) continue;
            any_live = true;
            int done = states[static_cast<size_t>(i)].learning
                           ? 0
                           : states[static_cast<size_t>(i)].phase - 1;
            p = std::min(p, done);
        }
        return any_live ? p : trace.max_completed_phase;
    };

    int checked_up_to = 0;
    auto converged_check = [&](long round) {
        trace.max_settled_phase = settled();
        if (!config.stop.epsilon) return false;
        for (int p = checked_up_to + 1; p <= trace.max_settled_phase; ++p) {
            auto it = phase_range.find(p);
            if (it != phase_range.end() &&
                it->second.second - it->second.first <= *config.stop.epsilon) {
                trace.converged = true;
                trace.p_epsilon = p;
                trace.stop_round = round;
                return true;
            }
        }
        checked_up_to = trace.max_settled_phase;
        return false;
    };

    if (converged_check(0)) {
        trace.rounds = 0;
        return trace;
    }

    long round = 0;
    for (round = 1; round <= config.stop.max_rounds; ++round) {
        bool progressed = false;

        std::vector<detail::InFlight> deliveries;
        if (auto it = pending.find(round); it != pending.end()) {
            deliveries = std::move(it->second);
            pending.erase(it);
        }
        std::sort(deliveries.begin(), deliveries.end(), detail::deliver_order);

        std::set<NodeId> crashing;
        for (const auto& [node, ev] : crash_at)
            if (ev->round == round) crashing.insert(node);

        for (const auto& m : deliveries) {
            MsgRecord& rec = trace.messages[m.record];
            rec.deliver_round = round;
            if (states[static_cast<size_t>(m.to)].crashed) {
                rec.status = MsgStatus::RecipientCrashed;
                continue;
            }
            rec.status = MsgStatus::Delivered;
            NodeState& slot = states[static_cast<size_t>(m.to)];
            size_t recorded_before = slot.recorded.size();
            size_t est_before = slot.est.nodes.size() + slot.est.edges.size();
            auto out = on_receive(std::move(slot), g, kind, m.msg);
            rec.recorded =
                out.state.recorded.size() > recorded_before ||
                out.state.est.nodes.size() + out.state.est.edges.size() > est_before;
            const CrashEvent* ev = crashing.count(m.to) ? crash_at.at(m.to) : nullptr;
            schedule(m.to, round, out.sends, ev ? &ev->final_recipients : nullptr);
            if (out.learn_finished) trace.learns.push_back({m.to, round});
            if (out.completed) note_completion(m.to, *out.completed, round);
            est_check(out.state);
            states[static_cast<size_t>(m.to)] = std::move(out.state);
            progressed = true;
        }

        // One update attempt per node per round; a crashing node still takes
        // its final step, with its sends filtered above/below.
        for (NodeId i = 0; i < n; ++i) {
            if (states[static_cast<size_t>(i)].crashed) continue;
            auto out = try_update(std::move(states[static_cast<size_t>(i)]), g, kind, config.f);
            if (out.phase_advanced) {
                const CrashEvent* ev = crashing.count(i) ? crash_at.at(i) : nullptr;
                schedule(i, round, out.sends, ev ? &ev->final_recipients : nullptr);
                if (out.completed) note_completion(i, *out.completed, round);
                est_check(out.state);
                progressed = true;
            }
            states[static_cast<size_t>(i)] = std::move(out.state);
        }

        for (NodeId i : crashing) {
            states[static_cast<size_t>(i)].crashed = true;
            trace.crashes.push_back({i, round, crash_at.at(i)->final_recipients});
            progressed = true;
        }

        trace.rounds = round;
        if (converged_check(round)) break;

        // Fixed point: no in-flight messages, no future crashes, nothing
        // moved this round — every later round would be identical.
        if (!progressed && pending.empty()) {
            bool future_crash = false;
            for (const auto& [node, ev] : crash_at) future_crash |= ev->round > round;
            if (!future_crash) break;
        }
    }
    if (!trace.converged) trace.stop_round = trace.rounds;
    return trace;  // undelivered messages keep their default Pending status
}

// The adversarial ring-of-four demonstration: inputs (0, 0, e, e) and
// cross-partition channels delayed past the horizon, run under LocWA with
// f=1. The {a,b} and {c,d} values never mix, so the gap stays exactly e for
// every completed phase.
inline Trace necessity_demo(double eps_prime = 1.0, long max_rounds = 500) {
    DiGraph g = ring(4);
    const NodeId a = 0, b = 1, c = 2, d = 3;
    std::vector<DelayRule> rules;
    int far = 1'000'000;  // beyond any admissible horizon; delivery stays pending
    for (Edge e : {Edge{d, a}, Edge{c, b}, Edge{a, d}, Edge{b, c}})
        rules.push_back(DelayRule{e.first, e.second, std::nullopt, std::nullopt, far});
    SimConfig cfg{g,
                  ProtocolKind::locwa(),
                  1,
                  {0.0, 0.0, eps_prime, eps_prime},
                  DelayScenario::script(std::move(rules), 1),
                  {},
                  StopRule{std::nullopt, max_rounds}};
    return run(cfg);
}

// ---------------------------------------------------------------------------
// Trace serialization: line-delimited records — a config record, one record
// per message / learn completion / phase completion / crash, and a summary.
// Field names are stable; identical configs serialize byte-identically.
// ---------------------------------------------------------------------------

inline json config_json(const SimConfig& c) {
    json j;
    j["t"] = "config";
    json jg;
    jg["n"] = c.g.size();
    jg["directed"] = !c.g.is_undirected();
    json edges = json::array();
    for (const auto& [x, y] : c.g.edges()) edges.push_back({x, y});
    jg["edges"] = std::move(edges);
    if (c.g.has_labels()) {
        json labels = json::array();
        for (NodeId i = 0; i < c.g.size(); ++i) labels.push_back(c.g.label(i));
        jg["labels"] = std::move(labels);
    }
    j["graph"] = std::move(jg);
    j["protocol"] = c.kind.name();
    j["k"] = c.kind.k;
    j["f"] = c.f;
    j["inputs"] = c.inputs;
    j["delays"] = c.delays.describe(c.g);
    json crashes = json::array();
    for (const auto& ev : c.crashes) {
        json je;
        je["node"] = c.g.display(ev.node);
        je["round"] = ev.round;
        json fr = json::array();
        for (NodeId r : ev.final_recipients) fr.push_back(c.g.display(r));
        je["final_recipients"] = std::move(fr);
        crashes.push_back(std::move(je));
    }
    j["crashes"] = std::move(crashes);
    json stop;
    if (c.stop.epsilon) stop["epsilon"] = *c.stop.epsilon;
    stop["max_rounds"] = c.stop.max_rounds;
    j["stop"] = std::move(stop);
    return j;
}

inline std::string to_jsonl(const Trace& trace) {
    const DiGraph& g = trace.config.g;
    std::ostringstream out;
    out << config_json(trace.config).dump() << "\n";
    for (const auto& m : trace.messages) {
        json j;
        j["t"] = "msg";
        j["send_round"] = m.send_round;
        j["deliver_round"] = m.deliver_round;
        j["from"] = g.display(m.from);
        j["to"] = g.display(m.to);
        j["src"] = g.display(m.source);
        j["phase"] = m.phase;
        j["kind"] = m.kind == MsgKind::Value ? "value" : "learn";
        j["status"] = m.status == MsgStatus::Delivered
                          ? "delivered"
                          : (m.status == MsgStatus::RecipientCrashed ? "recipient_crashed"
                                                                     : "pending");
        j["recorded"] = m.recorded;
        out << j.dump() << "\n";
    }
    for (const auto& l : trace.learns) {
        json j;
        j["t"] = "learn_done";
        j["node"] = g.display(l.node);
        j["round"] = l.round;
        out << j.dump() << "\n";
    }
    for (const auto& p : trace.phases) {
        json j;
        j["t"] = "phase";
        j["node"] = g.display(p.node);
        j["phase"] = p.phase;
        j["value"] = p.value;
        j["round"] = p.round;
        json heard = json::array();
        for (NodeId h : p.heard) heard.push_back(g.display(h));
        j["heard"] = std::move(heard);
        out << j.dump() << "\n";
    }
    for (const auto& c : trace.crashes) {
        json j;
        j["t"] = "crash";
        j["node"] = g.display(c.node);
        j["round"] = c.round;
        json fr = json::array();
        for (NodeId r : c.final_recipients) fr.push_back(g.display(r));
        j["final_recipients"] = std::move(fr);
        out << j.dump() << "\n";
    }
    json s;
    s["t"] = "summary";
    s["converged"] = trace.converged;
    if (trace.p_epsilon) s["p_epsilon"] = *trace.p_epsilon;
    s["stop_round"] = trace.stop_round;
    s["rounds"] = trace.rounds;
    s["messages"] = trace.messages.size();
    s["max_completed_phase"] = trace.max_completed_phase;
    s["max_settled_phase"] = trace.max_settled_phase;
    out << s.dump() << "\n";
    return out.str();
}

}  // namespace wavg
