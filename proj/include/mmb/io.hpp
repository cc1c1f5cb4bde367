#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmb/common.hpp"
#include "mmb/graph.hpp"

namespace mmb {

// Per-edge Gaussian parameters, aligned with Graph::edges: prior mean of the
// unknown edge mean, known observation-noise sd, and prior sd.
struct EdgeParams {
    std::vector<double> prior_mean;
    std::vector<double> noise_sd;
    std::vector<double> prior_sd;
};

// Fill-ins for parameter columns a file does not carry.
struct ParamDefaults {
    std::optional<double> noise_sd;
    std::optional<double> prior_sd;
};

struct Network {
    Graph graph;
    EdgeParams params;
};

enum class FileFormat { edge_list, pajek };

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline bool is_numeric_token(const std::string& tok) {
    if (tok.empty()) return false;
    return std::all_of(tok.begin(), tok.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

inline std::string strip_comment(const std::string& line, char marker) {
    const auto pos = line.find(marker);
    return pos == std::string::npos ? line : line.substr(0, pos);
}

[[noreturn]] inline void fail_line(std::size_t lineno, const std::string& msg) {
    throw data_error("line " + std::to_string(lineno) + ": " + msg);
}

} // namespace detail

// Parses the whitespace-separated edge-list format:
//   tail head mu0 [sigma] [varsigma0]
// `#` starts a comment. Vertices are either all non-negative integers (used
// literally as ids) or all symbolic names (interned to dense ids in order of
// first appearance); mixing the two is rejected as ambiguous. Edge indices
// follow file order. Missing optional columns are filled from `defaults`.
inline Network load_edge_list(std::istream& in, bool directed,
                              const ParamDefaults& defaults = {}) {
    struct RawEdge {
        std::string tail, head;
        double mu = 0.0;
        std::optional<double> sigma, varsigma;
        std::size_t lineno = 0;
    };
    std::vector<RawEdge> raw;
    bool any_symbolic = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = detail::split_ws(detail::strip_comment(line, '#'));
        if (toks.empty()) continue;
        if (toks.size() < 3) detail::fail_line(lineno, "expected `tail head mu0 [sigma] [varsigma0]`");
        if (toks.size() > 5) detail::fail_line(lineno, "too many fields");
        RawEdge e;
        e.tail = toks[0];
        e.head = toks[1];
        e.lineno = lineno;
        if (e.tail == e.head) detail::fail_line(lineno, "self-loop on vertex `" + e.tail + "`");
        if (!detail::parse_double(toks[2], e.mu)) detail::fail_line(lineno, "bad mean `" + toks[2] + "`");
        if (toks.size() >= 4) {
            double s;
            if (!detail::parse_double(toks[3], s) || s < 0.0)
                detail::fail_line(lineno, "bad sigma `" + toks[3] + "`");
            e.sigma = s;
        }
        if (toks.size() >= 5) {
            double v;
            if (!detail::parse_double(toks[4], v) || v < 0.0)
                detail::fail_line(lineno, "bad varsigma0 `" + toks[4] + "`");
            e.varsigma = v;
        }
        any_symbolic = any_symbolic || !detail::is_numeric_token(e.tail) ||
                       !detail::is_numeric_token(e.head);
        raw.push_back(std::move(e));
    }

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    std::vector<std::string> labels;
    VertexId vertex_count = 0;
    if (any_symbolic) {
        std::unordered_map<std::string, VertexId> intern;
        auto resolve = [&](const std::string& name, std::size_t at) {
            if (detail::is_numeric_token(name))
                detail::fail_line(at, "ambiguous vertex token `" + name +
                                          "` (file mixes numeric ids and symbolic names)");
            auto [it, inserted] = intern.emplace(name, static_cast<VertexId>(labels.size()));
            if (inserted) labels.push_back(name);
            return it->second;
        };
        for (const RawEdge& e : raw)
            edges.push_back({resolve(e.tail, e.lineno), resolve(e.head, e.lineno)});
        vertex_count = static_cast<VertexId>(labels.size());
    } else {
        constexpr long kMaxNumericId = 10'000'000;
        for (const RawEdge& e : raw) {
            long t = 0, h = 0;
            try {
                t = std::stol(e.tail);
                h = std::stol(e.head);
            } catch (const std::exception&) {
                detail::fail_line(e.lineno, "vertex id out of range");
            }
            if (t > kMaxNumericId || h > kMaxNumericId)
                detail::fail_line(e.lineno, "vertex id too large");
            edges.push_back({static_cast<VertexId>(t), static_cast<VertexId>(h)});
            vertex_count = std::max({vertex_count, static_cast<VertexId>(t + 1),
                                     static_cast<VertexId>(h + 1)});
        }
    }

    Network net;
    net.graph = make_graph(directed, vertex_count, std::move(edges), std::move(labels));
    net.params.prior_mean.reserve(raw.size());
    net.params.noise_sd.reserve(raw.size());
    net.params.prior_sd.reserve(raw.size());
    for (const RawEdge& e : raw) {
        net.params.prior_mean.push_back(e.mu);
        if (e.sigma) net.params.noise_sd.push_back(*e.sigma);
        else if (defaults.noise_sd) net.params.noise_sd.push_back(*defaults.noise_sd);
        else detail::fail_line(e.lineno, "missing sigma and no default configured");
        if (e.varsigma) net.params.prior_sd.push_back(*e.varsigma);
        else if (defaults.prior_sd) net.params.prior_sd.push_back(*defaults.prior_sd);
        else detail::fail_line(e.lineno, "missing varsigma0 and no default configured");
    }
    return net;
}

// Parses the Pajek subset `*Vertices` / `*Edges` / `*Arcs` with weighted
// `u v w` lines (1-based vertex ids). `*Edges` yields an undirected graph,
// `*Arcs` a directed one. Edge weights are negated to form prior means
// (weights count collaborations; lower cost = more of them). Noise and prior
// sds come from `defaults`.
inline Network load_pajek(std::istream& in, const ParamDefaults& defaults = {}) {
    std::string line;
    std::size_t lineno = 0;
    auto next_content = [&](std::string& out) {
        while (std::getline(in, line)) {
            ++lineno;
            out = detail::strip_comment(line, '%');
            if (!detail::split_ws(out).empty()) return true;
        }
        return false;
    };

    std::string content;
    if (!next_content(content)) throw data_error("empty stream: missing *Vertices header");
    {
        auto toks = detail::split_ws(content);
        std::string head = toks[0];
        std::transform(head.begin(), head.end(), head.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (head != "*vertices" || toks.size() < 2)
            detail::fail_line(lineno, "expected `*Vertices n` header");
    }
    long n = 0;
    {
        auto toks = detail::split_ws(content);
        try {
            n = std::stol(toks[1]);
        } catch (const std::exception&) {
            detail::fail_line(lineno, "bad vertex count `" + toks[1] + "`");
        }
        if (n < 0) detail::fail_line(lineno, "negative vertex count");
    }

    std::vector<std::string> labels(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = std::to_string(i + 1);
    std::vector<char> defined(static_cast<std::size_t>(n), 0);

    std::optional<bool> directed;
    std::vector<Edge> edges;
    std::vector<double> weights;
    bool in_edge_section = false;
    while (next_content(content)) {
        auto toks = detail::split_ws(content);
        if (toks[0][0] == '*') {
            std::string section = toks[0];
            std::transform(section.begin(), section.end(), section.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (section == "*edges" || section == "*arcs") {
                const bool dir = section == "*arcs";
                if (directed && *directed != dir)
                    detail::fail_line(lineno, "mixed *Edges and *Arcs sections are not supported");
                directed = dir;
                in_edge_section = true;
            } else {
                detail::fail_line(lineno, "unsupported section `" + toks[0] + "`");
            }
            continue;
        }
        if (!in_edge_section) {
            // Vertex definition: `id ["label" ...]`; coordinates are ignored.
            long id = 0;
            try {
                id = std::stol(toks[0]);
            } catch (const std::exception&) {
                detail::fail_line(lineno, "bad vertex id `" + toks[0] + "`");
            }
            if (id < 1 || id > n) detail::fail_line(lineno, "vertex id " + toks[0] + " out of 1.." + std::to_string(n));
            if (defined[static_cast<std::size_t>(id - 1)])
                detail::fail_line(lineno, "duplicate definition of vertex " + toks[0]);
            defined[static_cast<std::size_t>(id - 1)] = 1;
            if (toks.size() >= 2) {
                std::string lab = toks[1];
                if (!lab.empty() && lab.front() == '"') {
                    // Re-scan from the raw content to keep spaces inside quotes.
                    const auto open = content.find('"');
                    const auto close = content.find('"', open + 1);
                    lab = close == std::string::npos ? content.substr(open + 1)
                                                     : content.substr(open + 1, close - open - 1);
                }
                labels[static_cast<std::size_t>(id - 1)] = lab;
            }
            continue;
        }
        if (toks.size() < 3) detail::fail_line(lineno, "expected `u v w` edge line");
        long u = 0, v = 0;
        try {
            u = std::stol(toks[0]);
            v = std::stol(toks[1]);
        } catch (const std::exception&) {
            detail::fail_line(lineno, "bad vertex id on edge line");
        }
        if (u < 1 || u > n) detail::fail_line(lineno, "vertex id " + toks[0] + " out of 1.." + std::to_string(n));
        if (v < 1 || v > n) detail::fail_line(lineno, "vertex id " + toks[1] + " out of 1.." + std::to_string(n));
        if (u == v) detail::fail_line(lineno, "self-loop on vertex " + toks[0]);
        double w;
        if (!detail::parse_double(toks[2], w)) detail::fail_line(lineno, "non-numeric weight `" + toks[2] + "`");
        edges.push_back({static_cast<VertexId>(u - 1), static_cast<VertexId>(v - 1)});
        weights.push_back(w);
    }
    if (!directed) throw data_error("missing *Edges or *Arcs section");

    Network net;
    net.graph = make_graph(*directed, static_cast<VertexId>(n), std::move(edges), std::move(labels));
    const std::size_t d = weights.size();
    net.params.prior_mean.resize(d);
    for (std::size_t i = 0; i < d; ++i) net.params.prior_mean[i] = -weights[i];
    if (!defaults.noise_sd) throw data_error("pajek input requires a configured default sigma");
    if (!defaults.prior_sd) throw data_error("pajek input requires a configured default varsigma0");
    net.params.noise_sd.assign(d, *defaults.noise_sd);
    net.params.prior_sd.assign(d, *defaults.prior_sd);
    return net;
}

// Serializes a network back to the edge-list format with full double
// round-trip precision; loading the output reproduces the same graph and
// parameter table.
inline void write_edge_list(std::ostream& out, const Network& net) {
    const Graph& g = net.graph;
    char buf[64];
    auto fmt = [&](double x) {
        const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf, static_cast<std::size_t>(len));
    };
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edges[static_cast<std::size_t>(e)];
        out << g.label(ed.tail) << ' ' << g.label(ed.head) << ' '
            << fmt(net.params.prior_mean[static_cast<std::size_t>(e)]) << ' '
            << fmt(net.params.noise_sd[static_cast<std::size_t>(e)]) << ' '
            << fmt(net.params.prior_sd[static_cast<std::size_t>(e)]) << '\n';
    }
}

// Loads a network file, prefixing parse errors with the file name. For
// edge lists `directed` is required; for Pajek the section decides and a
// caller-supplied value must agree.
inline Network load_network_file(const std::string& path, FileFormat format,
                                 std::optional<bool> directed,
                                 const ParamDefaults& defaults = {}) {
    std::ifstream in(path);
    if (!in) throw data_error(path + ": cannot open");
    try {
        if (format == FileFormat::edge_list) {
            if (!directed) throw config_error("edge-list input requires `directed`");
            return load_edge_list(in, *directed, defaults);
        }
        Network net = load_pajek(in, defaults);
        if (directed && *directed != net.graph.directed)
            throw config_error("`directed` conflicts with the pajek section type");
        return net;
    } catch (const config_error&) {
        throw;
    } catch (const data_error& err) {
        throw data_error(path + ": " + err.what());
    }
}

} // namespace mmb
