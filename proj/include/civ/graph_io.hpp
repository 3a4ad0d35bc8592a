#ifndef CIV_GRAPH_IO_HPP
#define CIV_GRAPH_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <civ/error.hpp>
#include <civ/graph.hpp>

namespace civ {

namespace detail {

inline bool is_ident_char(char c, bool first) {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return true;
    return !first && std::isdigit(static_cast<unsigned char>(c));
}

struct LineScanner {
    const std::string& line;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }

    bool done() {
        skip_ws();
        return pos >= line.size();
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < line.size() && is_ident_char(line[pos], pos == start)) ++pos;
        return line.substr(start, pos - start);
    }

    // "->" or "<->"; empty string when neither follows.
    std::string arrow() {
        skip_ws();
        if (line.compare(pos, 3, "<->") == 0) {
            pos += 3;
            return "<->";
        }
        if (line.compare(pos, 2, "->") == 0) {
            pos += 2;
            return "->";
        }
        return {};
    }
};

}  // namespace detail

// Graph file format: one statement per line, '#' starts a comment. Optional
// "node A B C" declaration lines; edge lines "A -> B" or "A <-> B" with
// arbitrary spacing. Node order is first-mention order.
inline Admg parse_graph(const std::string& text) {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    auto mention = [&](const std::string& name) {
        for (const auto& n : nodes)
            if (n == name) return;
        nodes.push_back(name);
    };

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        detail::LineScanner sc{raw};
        if (sc.done()) continue;

        auto fail = [&](const std::string& what) -> Error {
            return Error(errc::syntax, "line " + std::to_string(lineno) + ": " + what);
        };

        std::string first = sc.ident();
        if (first.empty()) throw fail("expected node name");

        if (first == "node" && !sc.done()) {
            while (!sc.done()) {
                std::string name = sc.ident();
                if (name.empty()) throw fail("bad node name in declaration");
                mention(name);
            }
            continue;
        }

        std::string arrow = sc.arrow();
        if (arrow.empty()) throw fail("expected '->' or '<->'");
        std::string second = sc.ident();
        if (second.empty()) throw fail("expected node name after '" + arrow + "'");
        if (!sc.done()) throw fail("trailing characters");

        mention(first);
        mention(second);
        if (arrow == "->") {
            edges.push_back({EdgeKind::Directed, first, second});
        } else {
            edges.push_back({EdgeKind::Bidirected, std::min(first, second), std::max(first, second)});
        }
    }
    return Admg::create(std::move(nodes), edges);
}

inline Admg load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io, "cannot open graph file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

// Inverse of parse_graph up to structural equality, including node order. A
// "node" declaration line is emitted only when the edge lines alone would not
// reproduce the node order (isolated nodes, or first mentions out of order).
inline std::string serialize_graph(const Admg& g) {
    auto edges = g.edges();

    std::vector<std::string> mention_order;
    auto mention = [&](const std::string& name) {
        for (const auto& n : mention_order)
            if (n == name) return;
        mention_order.push_back(name);
    };
    for (const auto& e : edges) {
        mention(e.tail);
        mention(e.head);
    }

    std::ostringstream out;
    if (mention_order != g.node_names()) {
        out << "node";
        for (const auto& n : g.node_names()) out << ' ' << n;
        out << '\n';
    }
    for (const auto& e : edges)
        out << e.tail << (e.kind == EdgeKind::Directed ? " -> " : " <-> ") << e.head << '\n';
    return out.str();
}

}  // namespace civ

#endif  // CIV_GRAPH_IO_HPP
