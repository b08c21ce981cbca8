#pragma once

// Line-oriented graph interchange format:
//
//   digraph <n>          (or: graph <n>, for undirected graphs)
//   <i> <j>              one ordered pair per line; for `graph` each
//                        undirected edge is listed once and symmetrized
//   label <i> <string>   optional display labels
//
// '#' starts a comment; blank lines are ignored. Parse errors carry the
// offending line number.

#include <fstream>
#include <sstream>

#include "wavg/graph.hpp"

namespace wavg {

struct GraphParseError : std::runtime_error {
    GraphParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    int line_no;
};

inline DiGraph read_graph(std::istream& in) {
    std::string line;
    int line_no = 0;
    bool undirected = false;
    int n = -1;
    std::vector<Edge> edges;
    std::vector<std::string> labels;

    auto next_meaningful = [&](std::string& out) -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok) {
                out = line;
                return true;
            }
        }
        return false;
    };

    if (!next_meaningful(line)) throw GraphParseError(line_no, "missing header");
    {
        std::istringstream header(line);
        std::string kind;
        header >> kind >> n;
        if (header.fail() || (kind != "digraph" && kind != "graph"))
            throw GraphParseError(line_no, "expected 'digraph <n>' or 'graph <n>'");
        undirected = (kind == "graph");
        if (n < 2) throw GraphParseError(line_no, "graph needs n >= 2");
        labels.assign(static_cast<size_t>(n), "");
    }

    while (next_meaningful(line)) {
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "label") {
            int i;
            std::string name;
            ls >> i >> name;
            if (ls.fail() || i < 0 || i >= n)
                throw GraphParseError(line_no, "bad label line");
            labels[static_cast<size_t>(i)] = name;
            continue;
        }
        int i, j;
        std::istringstream es(line);
        es >> i >> j;
        std::string trailing;
        if (es.fail() || (es >> trailing))
            throw GraphParseError(line_no, "expected edge '<i> <j>'");
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw GraphParseError(line_no, "edge endpoint out of range");
        if (i == j) throw GraphParseError(line_no, "self-loops are not allowed");
        edges.emplace_back(i, j);
    }

    bool any_label = false;
    for (const auto& l : labels) any_label |= !l.empty();
    if (!any_label) labels.clear();
    try {
        return undirected ? DiGraph::undirected(n, std::move(edges), std::move(labels))
                          : DiGraph::directed(n, std::move(edges), std::move(labels));
    } catch (const std::invalid_argument& e) {
        throw GraphParseError(line_no, e.what());
    }
}

inline DiGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return read_graph(in);
}

inline void write_graph(std::ostream& out, const DiGraph& g) {
    out << (g.is_undirected() ? "graph " : "digraph ") << g.size() << "\n";
    for (const auto& [i, j] : g.edges()) {
        if (g.is_undirected() && i > j) continue;  // each undirected edge once
        out << i << " " << j << "\n";
    }
    if (g.has_labels())
        for (NodeId i = 0; i < g.size(); ++i)
            if (!g.label(i).empty()) out << "label " << i << " " << g.label(i) << "\n";
}

inline void write_graph_file(const std::string& path, const DiGraph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_graph(out, g);
}

// Accepts a node label or a decimal index.
inline NodeId parse_node(const DiGraph& g, const std::string& token) {
    if (auto id = g.node_by_label(token)) return *id;
    try {
        size_t pos = 0;
        int v = std::stoi(token, &pos);
        if (pos == token.size()) {
            g.check_node(v);
            return v;
        }
    } catch (const std::logic_error&) {
    }
    throw std::invalid_argument("unknown node '" + token + "'");
}

}  // namespace wavg
