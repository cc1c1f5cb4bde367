#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmb/common.hpp"

namespace mmb {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

struct Edge {
    VertexId tail = -1;
    VertexId head = -1;
};

// Vertex/edge structure with stable, dense edge indices. Edge index order is
// file order and doubles as the base-arm index, so it must never be permuted
// after load. Undirected edges appear in the adjacency lists of both
// endpoints; parallel edges are permitted and are distinct arms.
struct Graph {
    bool directed = false;
    VertexId vertex_count = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<EdgeId>> adjacency; // outgoing edge ids per vertex
    std::vector<std::string> vertex_labels;     // original names; decimal ids if none

    EdgeId edge_count() const { return static_cast<EdgeId>(edges.size()); }

    // Endpoint of `e` opposite to `v`; v must be an endpoint.
    VertexId other_end(EdgeId e, VertexId v) const {
        const Edge& ed = edges[static_cast<std::size_t>(e)];
        return ed.tail == v ? ed.head : ed.tail;
    }

    const std::string& label(VertexId v) const {
        return vertex_labels[static_cast<std::size_t>(v)];
    }
};

inline Graph make_graph(bool directed, VertexId vertex_count, std::vector<Edge> edges,
                        std::vector<std::string> labels = {}) {
    if (vertex_count < 0) throw data_error("negative vertex count");
    Graph g;
    g.directed = directed;
    g.vertex_count = vertex_count;
    g.edges = std::move(edges);
    g.adjacency.assign(static_cast<std::size_t>(vertex_count), {});
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edges[static_cast<std::size_t>(e)];
        if (ed.tail < 0 || ed.tail >= vertex_count || ed.head < 0 || ed.head >= vertex_count)
            throw data_error("edge " + std::to_string(e) + ": endpoint out of range");
        if (ed.tail == ed.head)
            throw data_error("edge " + std::to_string(e) + ": self-loop");
        g.adjacency[static_cast<std::size_t>(ed.tail)].push_back(e);
        if (!directed) g.adjacency[static_cast<std::size_t>(ed.head)].push_back(e);
    }
    if (labels.empty()) {
        g.vertex_labels.reserve(static_cast<std::size_t>(vertex_count));
        for (VertexId v = 0; v < vertex_count; ++v) g.vertex_labels.push_back(std::to_string(v));
    } else {
        if (static_cast<VertexId>(labels.size()) != vertex_count)
            throw data_error("label count does not match vertex count");
        g.vertex_labels = std::move(labels);
    }
    return g;
}

// Ordered edge-index sequence from source to target (a super arm).
struct Path {
    std::vector<EdgeId> edges;
    VertexId source = -1;
    VertexId target = -1;

    bool operator==(const Path& other) const = default;
};

// The vertex sequence v0..vk induced by walking the path's edges from its
// source; empty if some edge cannot be chained (wrong direction or
// disconnected hop).
inline std::vector<VertexId> path_vertices(const Graph& g, const Path& p) {
    std::vector<VertexId> verts;
    if (p.edges.empty()) return verts;
    verts.reserve(p.edges.size() + 1);
    VertexId cur = p.source;
    verts.push_back(cur);
    for (EdgeId e : p.edges) {
        if (e < 0 || e >= g.edge_count()) return {};
        const Edge& ed = g.edges[static_cast<std::size_t>(e)];
        if (g.directed) {
            if (ed.tail != cur) return {};
            cur = ed.head;
        } else {
            if (ed.tail == cur) cur = ed.head;
            else if (ed.head == cur) cur = ed.tail;
            else return {};
        }
        verts.push_back(cur);
    }
    return verts;
}

// True iff the path is a nonempty simple source->target walk in this graph,
// respecting edge direction on directed graphs.
inline bool validate_path(const Graph& g, const Path& p) {
    if (p.edges.empty()) return false;
    if (p.source < 0 || p.source >= g.vertex_count) return false;
    if (p.target < 0 || p.target >= g.vertex_count) return false;
    const std::vector<VertexId> verts = path_vertices(g, p);
    if (verts.empty()) return false;
    if (verts.front() != p.source || verts.back() != p.target) return false;
    std::vector<char> seen(static_cast<std::size_t>(g.vertex_count), 0);
    for (VertexId v : verts) {
        if (seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

} // namespace mmb
