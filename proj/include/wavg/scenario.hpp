#pragma once

// Adversary scripts and run configuration.
//
// A DelayScenario assigns every (edge, send round, phase) a positive finite
// delivery delay in rounds; the provided variants are a constant, a per-edge
// table, a seeded random draw, and an ordered wildcard rule script. A
// CrashScenario lists at most f events (node, round, surviving recipients of
// that node's same-round sends). Scenario files are line-oriented:
//
//   graph file <path>          or   graph inline ... end
//   protocol <kind> [k]
//   f <int>
//   inputs <v...>              or   inputs random <lo> <hi>
//   delays constant <c>
//   delays random <min> <max> <seed>
//   delays table <default>  /  delays script <default>   (block until `end`)
//   crash <node> <round> [recipients...]
//   epsilon <eps>
//   max_rounds <int>
//
// Table lines are `<from> <to> <delay>`; script lines are
// `<from|*> <to|*> <send_round|*> <phase|*> <delay>`, first match wins.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wavg/generators.hpp"
#include "wavg/graph_io.hpp"
#include "wavg/protocols.hpp"

namespace wavg {

using json = nlohmann::ordered_json;

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) { return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL)); }

}  // namespace detail

struct DelayRule {
    std::optional<NodeId> from, to;  // nullopt = wildcard
    std::optional<long> send_round;
    std::optional<int> phase;
    int delay = 1;
};

class DelayScenario {
public:
    static DelayScenario constant(int c) {
        DelayScenario d;
        d.type_ = Type::Constant;
        d.default_ = check(c);
        return d;
    }
    static DelayScenario table(std::map<Edge, int> entries, int fallback) {
        DelayScenario d;
        d.type_ = Type::Table;
        for (const auto& [e, c] : entries) check(c);
        d.table_ = std::move(entries);
        d.default_ = check(fallback);
        return d;
    }
    static DelayScenario seeded_random(int lo, int hi, uint64_t seed) {
        if (lo < 1 || hi < lo)
            throw std::invalid_argument("random delays need 1 <= min <= max");
        DelayScenario d;
        d.type_ = Type::Random;
        d.lo_ = lo;
        d.hi_ = hi;
        d.seed_ = seed;
        return d;
    }
    static DelayScenario script(std::vector<DelayRule> rules, int fallback) {
        DelayScenario d;
        d.type_ = Type::Script;
        for (const auto& r : rules) check(r.delay);
        d.rules_ = std::move(rules);
        d.default_ = check(fallback);
        return d;
    }

    int delay(Edge e, long send_round, int phase) const {
        switch (type_) {
            case Type::Constant: return default_;
            case Type::Table: {
                auto it = table_.find(e);
                return it == table_.end() ? default_ : it->second;
            }
            case Type::Random: {
                uint64_t h = seed_;
                h = detail::mix(h, static_cast<uint64_t>(e.first));
                h = detail::mix(h, static_cast<uint64_t>(e.second));
                h = detail::mix(h, static_cast<uint64_t>(send_round));
                h = detail::mix(h, static_cast<uint64_t>(phase));
                return lo_ + static_cast<int>(h % static_cast<uint64_t>(hi_ - lo_ + 1));
            }
            case Type::Script:
                for (const auto& r : rules_) {
                    if (r.from && *r.from != e.first) continue;
                    if (r.to && *r.to != e.second) continue;
                    if (r.send_round && *r.send_round != send_round) continue;
                    if (r.phase && *r.phase != phase) continue;
                    return r.delay;
                }
                return default_;
        }
        return default_;
    }

    int max_delay() const {
        switch (type_) {
            case Type::Constant: return default_;
            case Type::Table: {
                int m = default_;
                for (const auto& [e, c] : table_) m = std::max(m, c);
                return m;
            }
            case Type::Random: return hi_;
            case Type::Script: {
                int m = default_;
                for (const auto& r : rules_) m = std::max(m, r.delay);
                return m;
            }
        }
        return default_;
    }

    DelayScenario with_seed_offset(uint64_t offset) const {
        DelayScenario d = *this;
        if (offset != 0 && d.type_ == Type::Random) d.seed_ = detail::mix(d.seed_, offset);
        return d;
    }

    json describe(const DiGraph& g) const {
        json j;
        switch (type_) {
            case Type::Constant:
                j["type"] = "constant";
                j["delay"] = default_;
                break;
            case Type::Table: {
                j["type"] = "table";
                j["default"] = default_;
                json entries = json::array();
                for (const auto& [e, c] : table_)
                    entries.push_back({g.display(e.first), g.display(e.second), c});
                j["entries"] = std::move(entries);
                break;
            }
            case Type::Random:
                j["type"] = "random";
                j["min"] = lo_;
                j["max"] = hi_;
                j["seed"] = seed_;
                break;
            case Type::Script: {
                j["type"] = "script";
                j["default"] = default_;
                json rules = json::array();
                for (const auto& r : rules_) {
                    json jr;
                    jr["from"] = r.from ? json(g.display(*r.from)) : json("*");
                    jr["to"] = r.to ? json(g.display(*r.to)) : json("*");
                    jr["send_round"] = r.send_round ? json(*r.send_round) : json("*");
                    jr["phase"] = r.phase ? json(*r.phase) : json("*");
                    jr["delay"] = r.delay;
                    rules.push_back(std::move(jr));
                }
                j["rules"] = std::move(rules);
                break;
            }
        }
        return j;
    }

private:
    enum class Type { Constant, Table, Random, Script };

    static int check(int c) {
        if (c < 1) throw std::invalid_argument("delays must be >= 1 round");
        return c;
    }

    Type type_ = Type::Constant;
    int default_ = 1;
    std::map<Edge, int> table_;
    int lo_ = 1, hi_ = 1;
    uint64_t seed_ = 0;
    std::vector<DelayRule> rules_;
};

struct CrashEvent {
    NodeId node = -1;
    long round = 0;
    NodeSet final_recipients;  // same-round sends that survive; empty = none
};

using CrashScenario = std::vector<CrashEvent>;

struct StopRule {
    std::optional<double> epsilon;
    long max_rounds = 1'000'000;
};

struct SimConfig {
    DiGraph g = ring(2);
    ProtocolKind kind;
    int f = 0;
    std::vector<double> inputs;
    DelayScenario delays = DelayScenario::constant(1);
    CrashScenario crashes;
    StopRule stop;

    void validate() const {
        kind.validate(g);
        if (f < 0) throw std::invalid_argument("f must be >= 0");
        if (static_cast<int>(inputs.size()) != g.size())
            throw std::invalid_argument("need one input per node");
        for (double v : inputs)
            if (!std::isfinite(v)) throw std::invalid_argument("inputs must be finite");
        if (static_cast<int>(crashes.size()) > f)
            throw std::invalid_argument("crash scenario exceeds the fault budget f");
        NodeSet seen;
        for (const auto& c : crashes) {
            g.check_node(c.node);
            if (c.round < 0) throw std::invalid_argument("crash round must be >= 0");
            if (!seen.insert(c.node).second)
                throw std::invalid_argument("a node can crash only once");
            for (NodeId r : c.final_recipients) g.check_node(r);
        }
        if (stop.max_rounds < 1 || stop.max_rounds > 1'000'000)
            throw std::invalid_argument("max_rounds must be in [1, 1e6]");
        if (stop.epsilon && !(*stop.epsilon > 0))
            throw std::invalid_argument("epsilon must be > 0");
    }
};

// A parsed scenario file; `instantiate` resolves randomized inputs.
struct Scenario {
    DiGraph g = ring(2);
    ProtocolKind kind;
    int f = 0;
    std::vector<double> inputs;
    bool inputs_random = false;
    double input_lo = 0.0, input_hi = 1.0;
    DelayScenario delays = DelayScenario::constant(1);
    CrashScenario crashes;
    StopRule stop;

    SimConfig instantiate(uint64_t seed_offset = 0) const {
        SimConfig cfg{g, kind, f, inputs, delays.with_seed_offset(seed_offset), crashes, stop};
        if (inputs_random) {
            cfg.inputs.assign(static_cast<size_t>(g.size()), 0.0);
            for (NodeId i = 0; i < g.size(); ++i) {
                uint64_t h = detail::mix(detail::mix(0x5eedULL, seed_offset),
                                         static_cast<uint64_t>(i));
                double u = static_cast<double>(h >> 11) * 0x1.0p-53;
                cfg.inputs[static_cast<size_t>(i)] = input_lo + u * (input_hi - input_lo);
            }
        }
        cfg.validate();
        return cfg;
    }
};

struct ScenarioParseError : std::runtime_error {
    ScenarioParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    int line_no;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in, const std::string& base_dir = ".") {
    Scenario sc;
    bool have_graph = false, have_protocol = false, have_inputs = false;
    std::string line;
    int line_no = 0;

    auto need_graph = [&](int at) {
        if (!have_graph) throw ScenarioParseError(at, "graph must be declared first");
    };

    while (std::getline(in, line)) {
        ++line_no;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        try {
            if (key == "graph") {
                if (toks.size() >= 3 && toks[1] == "file") {
                    auto path = std::filesystem::path(base_dir) / toks[2];
                    sc.g = read_graph_file(path.string());
                } else if (toks.size() >= 2 && toks[1] == "inline") {
                    std::ostringstream body;
                    while (std::getline(in, line)) {
                        ++line_no;
                        auto t = detail::tokenize(line);
                        if (!t.empty() && t[0] == "end") break;
                        body << line << "\n";
                    }
                    std::istringstream gs(body.str());
                    sc.g = read_graph(gs);
                } else {
                    throw ScenarioParseError(line_no, "expected 'graph file <path>' or 'graph inline'");
                }
                have_graph = true;
            } else if (key == "protocol") {
                if (toks.size() < 2) throw ScenarioParseError(line_no, "missing protocol kind");
                const std::string& kind = toks[1];
                int k = toks.size() >= 3 ? std::stoi(toks[2]) : 1;
                if (kind == "locwa") sc.kind = ProtocolKind::locwa();
                else if (kind == "klocwa") sc.kind = ProtocolKind::klocwa(k);
                else if (kind == "strong-klocwa") sc.kind = ProtocolKind::strong_klocwa(k);
                else if (kind == "lwa") sc.kind = ProtocolKind::lwa();
                else if (kind == "lbc") sc.kind = ProtocolKind::lbc();
                else throw ScenarioParseError(line_no, "unknown protocol '" + kind + "'");
                have_protocol = true;
            } else if (key == "f") {
                sc.f = std::stoi(toks.at(1));
            } else if (key == "inputs") {
                need_graph(line_no);
                if (toks.size() >= 2 && toks[1] == "random") {
                    sc.inputs_random = true;
                    sc.input_lo = std::stod(toks.at(2));
                    sc.input_hi = std::stod(toks.at(3));
                } else {
                    sc.inputs.clear();
                    for (size_t i = 1; i < toks.size(); ++i)
                        sc.inputs.push_back(std::stod(toks[i]));
                }
                have_inputs = true;
            } else if (key == "delays") {
                need_graph(line_no);
                const std::string& variant = toks.at(1);
                if (variant == "constant") {
                    sc.delays = DelayScenario::constant(std::stoi(toks.at(2)));
                } else if (variant == "random") {
                    sc.delays = DelayScenario::seeded_random(
                        std::stoi(toks.at(2)), std::stoi(toks.at(3)),
                        std::stoull(toks.at(4)));
                } else if (variant == "table" || variant == "script") {
                    int fallback = std::stoi(toks.at(2));
                    std::map<Edge, int> entries;
                    std::vector<DelayRule> rules;
                    while (std::getline(in, line)) {
                        ++line_no;
                        auto t = detail::tokenize(line);
                        if (t.empty()) continue;
                        if (t[0] == "end") break;
                        if (variant == "table") {
                            if (t.size() != 3)
                                throw ScenarioParseError(line_no, "table line: <from> <to> <delay>");
                            entries[{parse_node(sc.g, t[0]), parse_node(sc.g, t[1])}] =
                                std::stoi(t[2]);
                        } else {
                            if (t.size() != 5)
                                throw ScenarioParseError(
                                    line_no, "script line: <from|*> <to|*> <round|*> <phase|*> <delay>");
                            DelayRule r;
                            if (t[0] != "*") r.from = parse_node(sc.g, t[0]);
                            if (t[1] != "*") r.to = parse_node(sc.g, t[1]);
                            if (t[2] != "*") r.send_round = std::stol(t[2]);
                            if (t[3] != "*") r.phase = std::stoi(t[3]);
                            r.delay = std::stoi(t[4]);
                            rules.push_back(std::move(r));
                        }
                    }
                    sc.delays = variant == "table"
                                    ? DelayScenario::table(std::move(entries), fallback)
                                    : DelayScenario::script(std::move(rules), fallback);
                } else {
                    throw ScenarioParseError(line_no, "unknown delays variant '" + variant + "'");
                }
            } else if (key == "crash") {
                need_graph(line_no);
                CrashEvent ev;
                ev.node = parse_node(sc.g, toks.at(1));
                ev.round = std::stol(toks.at(2));
                for (size_t i = 3; i < toks.size(); ++i)
                    ev.final_recipients.insert(parse_node(sc.g, toks[i]));
                sc.crashes.push_back(std::move(ev));
            } else if (key == "epsilon") {
                sc.stop.epsilon = std::stod(toks.at(1));
            } else if (key == "max_rounds") {
                sc.stop.max_rounds = std::stol(toks.at(1));
            } else {
                throw ScenarioParseError(line_no, "unknown directive '" + key + "'");
            }
        } catch (const ScenarioParseError&) {
            throw;
        } catch (const std::logic_error& e) {
            throw ScenarioParseError(line_no, e.what());
        } catch (const std::runtime_error& e) {
            throw ScenarioParseError(line_no, e.what());
        }
    }
    if (!have_graph) throw ScenarioParseError(line_no, "scenario is missing a graph");
    if (!have_protocol) throw ScenarioParseError(line_no, "scenario is missing a protocol");
    if (!have_inputs) throw ScenarioParseError(line_no, "scenario is missing inputs");
    return sc;
}

inline Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    return parse_scenario(in, std::filesystem::path(path).parent_path().string());
}

}  // namespace wavg
