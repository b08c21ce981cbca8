#pragma once

// Property suites over generated corpora: condition algebra (monotonicity in
// k, CCA = n-CCA, agreement with the independent oracle, witness soundness,
// the undirected connectivity equivalence), the propagation dichotomy, and
// simulation batteries checking the closed-form phase/message bounds and the
// LWA invariants. The CLI `verify` command and the acceptance suite both run
// these; any counterexample is reported in full.

#include "wavg/metrics.hpp"

namespace wavg {

struct SuiteResult {
    bool ok = true;
    long cases = 0;
    std::vector<std::string> failures;
    std::string summary;

    void fail(const std::string& what) {
        ok = false;
        if (failures.size() < 50) failures.push_back(what);
    }
};

namespace detail {

inline std::string partition_str(const DiGraph& g, const Partition& p) {
    auto set_str = [&](const NodeSet& s) {
        std::string out = "{";
        for (NodeId v : s) out += (out.size() > 1 ? "," : "") + g.display(v);
        return out + "}";
    };
    return "L=" + set_str(p.L) + " C=" + set_str(p.C) + " R=" + set_str(p.R);
}

inline std::string graph_str(const DiGraph& g) {
    std::string out = "n=" + std::to_string(g.size()) + " edges=[";
    bool first = true;
    for (const auto& [i, j] : g.edges()) {
        if (!first) out += " ";
        first = false;
        out += std::to_string(i) + ">" + std::to_string(j);
    }
    return out + "]";
}

inline std::vector<DiGraph> random_corpus(int n_max, uint64_t seed, int count) {
    std::vector<DiGraph> graphs;
    const double densities[] = {0.2, 0.3, 0.4, 0.5};
    for (int i = 0; static_cast<int>(graphs.size()) < count; ++i) {
        int n = 2 + i % (n_max - 1);
        double p = densities[(i / (n_max - 1)) % 4];
        graphs.push_back(random_digraph(n, p, mix(seed, static_cast<uint64_t>(i))));
    }
    return graphs;
}

}  // namespace detail

// Condition algebra over a random corpus plus the undirected equivalence.
inline SuiteResult verify_conditions(int n_max = 6, uint64_t seed = 1,
                                     int graph_count = 200) {
    if (n_max > 10) throw std::invalid_argument("verify conditions: n_max <= 10 (oracle guard)");
    if (n_max < 2) throw std::invalid_argument("verify conditions: n_max >= 2");
    SuiteResult res;
    auto corpus = detail::random_corpus(n_max, seed, graph_count);

    auto witness_sound = [&](const DiGraph& g, const Verdict& v, bool cca) {
        if (v.holds) return true;
        const Partition& w = *v.witness;
        NodeSet LC = detail::set_union(w.L, w.C), RC = detail::set_union(w.R, w.C);
        if (cca) {
            auto point = [&](const NodeSet& A, const NodeSet& B) {
                NodeSet in = set_in_neighbors(g, B);
                int c = 0;
                for (NodeId j : in)
                    if (A.count(j)) ++c;
                return c >= v.f + 1;
            };
            return !point(LC, w.R) && !point(RC, w.L);
        }
        return !arrow_k(g, LC, w.R, v.f, v.k) && !arrow_k(g, RC, w.L, v.f, v.k);
    };

    for (const auto& g : corpus) {
        const int n = g.size();
        std::set<int> ks = {1, 2, n};
        if (n > 2) ks.insert(std::min(3, n));
        for (int f : {0, 1, 2}) {
            std::map<int, Verdict> verdicts;
            for (int k : ks) verdicts[k] = check_kcca(g, f, k);
            Verdict cca = check_cca(g, f);
            ++res.cases;

            // k-CCA implies k'-CCA for k <= k'.
            bool prev = false;
            for (int k : ks) {
                if (prev && !verdicts[k].holds)
                    res.fail("monotonicity: f=" + std::to_string(f) + " k=" +
                             std::to_string(k) + " on " + detail::graph_str(g));
                prev = prev || verdicts[k].holds;
            }
            // CCA is equivalent to n-CCA.
            if (cca.holds != verdicts[n].holds)
                res.fail("cca != n-cca: f=" + std::to_string(f) + " on " +
                         detail::graph_str(g));
            // Agreement with the independent oracle.
            for (int k : ks) {
                Verdict o = oracle_kcca(g, f, k);
                if (o.holds != verdicts[k].holds ||
                    (!o.holds && !(*o.witness == *verdicts[k].witness)))
                    res.fail("oracle disagrees: f=" + std::to_string(f) + " k=" +
                             std::to_string(k) + " on " + detail::graph_str(g));
            }
            // False verdicts carry a real violation.
            for (int k : ks)
                if (!witness_sound(g, verdicts[k], false))
                    res.fail("unsound witness: f=" + std::to_string(f) + " k=" +
                             std::to_string(k) + " " +
                             detail::partition_str(g, *verdicts[k].witness) + " on " +
                             detail::graph_str(g));
            if (!witness_sound(g, cca, true))
                res.fail("unsound cca witness on " + detail::graph_str(g));
        }
    }

    // Undirected equivalence: CCA(f) iff (f+1)-connectivity and n > 2f.
    std::vector<DiGraph> undirected = {ring(4), ring(5), ring(6), ring(8),
                                       complete(3), complete(4), complete(5),
                                       two_cliques(4, 1), two_cliques(6, 2),
                                       two_cliques(8, 3), two_cliques(8, 4)};
    for (int i = 0; i < 24; ++i) {
        int n = 3 + i % 6;
        undirected.push_back(random_undirected(n, 0.3 + 0.1 * (i % 4),
                                               detail::mix(seed ^ 0xabcdULL,
                                                           static_cast<uint64_t>(i))));
    }
    for (const auto& g : undirected) {
        int conn = vertex_connectivity(g);
        for (int f = 0; f <= 3; ++f) {
            ++res.cases;
            bool expect = conn >= f + 1 && g.size() > 2 * f;
            if (check_cca(g, f).holds != expect)
                res.fail("undirected equivalence: f=" + std::to_string(f) + " conn=" +
                         std::to_string(conn) + " on " + detail::graph_str(g));
        }
    }

    res.summary = "conditions: " + std::to_string(res.cases) + " cases, " +
                  std::to_string(res.failures.size()) + " failures";
    return res;
}

// Lemma-style dichotomy: on graphs satisfying k-CCA, for every 2-partition
// either side propagates to the other, and sequences are at most n-f-1 steps.
inline SuiteResult verify_lemma1(int n_max = 6, uint64_t seed = 2, int graph_count = 60) {
    SuiteResult res;
    auto corpus = detail::random_corpus(n_max, seed, graph_count);
    corpus.push_back(ring(4));
    corpus.push_back(complete(4));
    corpus.push_back(exampleG());

    for (const auto& g : corpus) {
        const int n = g.size();
        for (int f : {0, 1}) {
            for (int k : {1, 2}) {
                if (k > n) continue;
                if (!check_kcca(g, f, k).holds) continue;
                // Every bipartition of the node set, each side non-empty.
                for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << n); ++mask) {
                    NodeSet A, B;
                    for (NodeId v = 0; v < n; ++v)
                        ((mask >> v) & 1 ? A : B).insert(v);
                    ++res.cases;
                    auto ab = propagates(g, A, B, f, k);
                    auto ba = propagates(g, B, A, f, k);
                    if (!ab && !ba)
                        res.fail("dichotomy fails: f=" + std::to_string(f) + " k=" +
                                 std::to_string(k) + " mask=" + std::to_string(mask) +
                                 " on " + detail::graph_str(g));
                    for (const auto& s : {ab, ba})
                        if (s && s->l() > n - f - 1)
                            res.fail("sequence too long (l=" + std::to_string(s->l()) +
                                     "): f=" + std::to_string(f) + " on " +
                                     detail::graph_str(g));
                }
            }
        }
    }
    res.summary = "lemma1: " + std::to_string(res.cases) + " partitions, " +
                  std::to_string(res.failures.size()) + " failures";
    return res;
}

// ---------------------------------------------------------------------------
// Simulation batteries
// ---------------------------------------------------------------------------

struct NamedScenario {
    std::string name;
    SimConfig config;
};

namespace detail {

inline std::vector<double> spread_inputs(int n) {
    std::vector<double> in(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        in[static_cast<size_t>(i)] = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    return in;
}

inline DelayScenario battery_delays(int variant, uint64_t seed) {
    switch (variant % 3) {
        case 0: return DelayScenario::constant(1);
        case 1: return DelayScenario::seeded_random(1, 3, seed);
        default: return DelayScenario::constant(2);
    }
}

inline CrashScenario battery_crashes(int variant, int f, int n) {
    if (f < 1) return {};
    NodeId victim = variant % n;
    switch (variant % 3) {
        case 1: return {CrashEvent{victim, 2, {}}};  // silent mid-run stop
        case 2: {
            CrashEvent ev{victim, 3, {}};
            ev.final_recipients.insert((victim + 1) % n);  // partial broadcast
            return {ev};
        }
        default: return {};
    }
}

}  // namespace detail

// Random k-LocWA scenarios on graphs satisfying k-CCA, plus the fixed
// ring-of-four reference run. Crash cases include a partial final broadcast.
inline std::vector<NamedScenario> bounds_battery(uint64_t seed = 3, int scenarios = 20) {
    std::vector<NamedScenario> out;
    {
        SimConfig cfg{ring(4),          ProtocolKind::klocwa(2),
                      1,                {0.0, 0.0, 1.0, 1.0},
                      DelayScenario::constant(1), {},
                      StopRule{1e-3, 100000}};
        out.push_back({"ring4-klocwa2", cfg});
    }
    for (int i = 0; static_cast<int>(out.size()) < scenarios + 1; ++i) {
        uint64_t s = detail::mix(seed, static_cast<uint64_t>(i));
        int n = 4 + i % 3;
        double p = 0.4 + 0.1 * (i % 3);
        DiGraph g = random_digraph(n, p, s);
        int k = 1 + i % 3;
        if (k > n) continue;
        int f = (i % 2 == 0) ? 1 : 0;
        if (!check_kcca(g, f, k).holds) continue;
        // f=0 admits source nodes (no k-hop in-neighbors); alpha_k and hence
        // the phase-bound comparison are undefined there, so skip those graphs.
        bool alpha_defined = true;
        for (NodeId v = 0; v < n; ++v)
            alpha_defined &= !k_in_neighborhood(g, v, k).empty();
        if (!alpha_defined) continue;
        SimConfig cfg{std::move(g),
                      ProtocolKind::klocwa(k),
                      f,
                      detail::spread_inputs(n),
                      detail::battery_delays(i, s),
                      detail::battery_crashes(i, f, n),
                      StopRule{1e-3, 100000}};
        out.push_back({"rand-" + std::to_string(i), std::move(cfg)});
    }
    return out;
}

// Directed CCA-satisfying scenarios for LWA.
inline std::vector<NamedScenario> lwa_battery(uint64_t seed = 4, int scenarios = 20) {
    std::vector<NamedScenario> out;
    {
        SimConfig cfg{exampleG(), ProtocolKind::lwa(), 1, {0.0, 1.0, 0.25, 0.75},
                      DelayScenario::constant(1), {}, StopRule{1e-3, 100000}};
        out.push_back({"exampleG-lwa", cfg});
    }
    for (int i = 0; static_cast<int>(out.size()) < scenarios; ++i) {
        uint64_t s = detail::mix(seed, static_cast<uint64_t>(i));
        int n = 4 + i % 3;
        double p = 0.4 + 0.1 * (i % 3);
        DiGraph g = random_digraph(n, p, s);
        int f = (i % 2 == 0) ? 1 : 0;
        if (!check_cca(g, f).holds) continue;
        SimConfig cfg{std::move(g),
                      ProtocolKind::lwa(),
                      f,
                      detail::spread_inputs(n),
                      detail::battery_delays(i, s),
                      detail::battery_crashes(i, f, n),
                      StopRule{1e-3, 100000}};
        out.push_back({"rand-lwa-" + std::to_string(i), std::move(cfg)});
    }
    return out;
}

// Undirected CCA-satisfying scenarios for LBC.
inline std::vector<NamedScenario> lbc_battery(uint64_t seed = 5, int scenarios = 12) {
    std::vector<NamedScenario> out;
    auto push = [&](const std::string& name, DiGraph g, int f, int variant, uint64_t s) {
        int n = g.size();
        SimConfig cfg{std::move(g),
                      ProtocolKind::lbc(),
                      f,
                      detail::spread_inputs(n),
                      detail::battery_delays(variant, s),
                      detail::battery_crashes(variant, f, n),
                      StopRule{1e-3, 100000}};
        out.push_back({name, std::move(cfg)});
    };
    push("ring4-lbc", ring(4), 1, 0, seed);
    push("ring4-lbc-crash", ring(4), 1, 1, seed);
    push("two-cliques-lbc", two_cliques(8, 3), 2, 0, seed);
    push("two-cliques-lbc-crash", two_cliques(8, 3), 2, 2, seed);
    for (int i = 0; static_cast<int>(out.size()) < scenarios; ++i) {
        uint64_t s = detail::mix(seed, static_cast<uint64_t>(i));
        int n = 4 + i % 3;
        DiGraph g = random_undirected(n, 0.4 + 0.1 * (i % 3), s);
        int f = (i % 2 == 0) ? 1 : 0;
        if (!check_cca(g, f).holds) continue;
        push("rand-lbc-" + std::to_string(i), std::move(g), f, i, s);
    }
    return out;
}

// Observed phases/messages against the closed-form ceilings on every
// scenario of the bounds battery.
inline SuiteResult verify_bounds(uint64_t seed = 3, int scenarios = 20) {
    SuiteResult res;
    for (const auto& [name, cfg] : bounds_battery(seed, scenarios)) {
        ++res.cases;
        Trace t = run(cfg);
        ConvergenceReport rep = analyze(t, *cfg.stop.epsilon);
        if (!t.converged) {
            res.fail(name + ": did not converge within max_rounds");
            continue;
        }
        if (!rep.validity_ok) res.fail(name + ": validity violated");
        if (!rep.phase_bound) {
            res.fail(name + ": bound undefined");
            continue;
        }
        if (rep.delta > rep.epsilon && rep.p_epsilon &&
            static_cast<double>(*rep.p_epsilon) > *rep.phase_bound)
            res.fail(name + ": p_eps=" + std::to_string(*rep.p_epsilon) + " exceeds bound " +
                     std::to_string(*rep.phase_bound));
        if (rep.delta > rep.epsilon &&
            static_cast<double>(rep.messages_sent) > *rep.message_bound)
            res.fail(name + ": messages=" + std::to_string(rep.messages_sent) +
                     " exceed bound " + std::to_string(*rep.message_bound));
    }
    res.summary = "bounds: " + std::to_string(res.cases) + " scenarios, " +
                  std::to_string(res.failures.size()) + " failures";
    return res;
}

// LWA battery: convergence, validity, heard-set intersections (also asserted
// online by the engine) and estimated-graph soundness.
inline SuiteResult verify_lwa(uint64_t seed = 4, int scenarios = 20) {
    SuiteResult res;
    for (const auto& [name, cfg] : lwa_battery(seed, scenarios)) {
        ++res.cases;
        Trace t;
        try {
            t = run(cfg);  // SimError here means an online invariant tripped
        } catch (const SimError& e) {
            res.fail(name + ": " + e.what());
            continue;
        }
        if (!t.converged) {
            res.fail(name + ": did not converge");
            continue;
        }
        ConvergenceReport rep = analyze(t, *cfg.stop.epsilon);
        if (!rep.validity_ok) res.fail(name + ": validity violated");
        for (int p = 1; p <= t.max_completed_phase; ++p) {
            for (auto it = t.heard_star.lower_bound({0, 0}); it != t.heard_star.end(); ++it) {
                if (it->first.second != p) continue;
                for (auto jt = std::next(it); jt != t.heard_star.end(); ++jt) {
                    if (jt->first.second != p) continue;
                    bool meets = false;
                    for (NodeId h : it->second)
                        if (jt->second.count(h)) meets = true;
                    if (!meets)
                        res.fail(name + ": heard sets disjoint at phase " + std::to_string(p));
                }
            }
        }
    }
    res.summary = "lwa: " + std::to_string(res.cases) + " scenarios, " +
                  std::to_string(res.failures.size()) + " failures";
    return res;
}

}  // namespace wavg
