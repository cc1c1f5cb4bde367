#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include "mmb/common.hpp"
#include "mmb/graph.hpp"

namespace mmb {

// Optimal bottleneck path: the path minimizing its maximum edge weight, the
// value of that maximum, and the (first) edge on the path attaining it.
struct OracleResult {
    Path path;
    double bottleneck_value = 0.0;
    EdgeId bottleneck_edge = -1;
};

namespace detail {

inline OracleResult finish_result(const Graph& g, std::span<const double> weights, Path path) {
    OracleResult res;
    res.bottleneck_value = -std::numeric_limits<double>::infinity();
    for (EdgeId e : path.edges) {
        const double w = weights[static_cast<std::size_t>(e)];
        if (w > res.bottleneck_value) {
            res.bottleneck_value = w;
            res.bottleneck_edge = e;
        }
    }
    (void)g;
    res.path = std::move(path);
    return res;
}

} // namespace detail

// Label-setting minimax path search (Dijkstra with max-relaxation). Valid for
// arbitrary real weights, negative included: max(.) is non-decreasing under
// path extension, so a settled label is final. Works on directed and
// undirected graphs. Ties in the heap break on vertex id, and a vertex keeps
// the predecessor from its first settle, so the result is deterministic
// given the edge order of the graph.
inline OracleResult minimax_dijkstra(const Graph& g, std::span<const double> weights,
                                     VertexId source, VertexId target) {
    if (source < 0 || source >= g.vertex_count || target < 0 || target >= g.vertex_count)
        throw std::invalid_argument("minimax_dijkstra: vertex out of range");
    if (weights.size() != static_cast<std::size_t>(g.edge_count()))
        throw std::invalid_argument("minimax_dijkstra: weight vector size mismatch");
    if (source == target) throw unreachable_error("no simple path from a vertex to itself");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(g.vertex_count), inf);
    std::vector<EdgeId> pred(static_cast<std::size_t>(g.vertex_count), -1);
    std::vector<char> settled(static_cast<std::size_t>(g.vertex_count), 0);
    // An empty path has no edges; its maximum is -inf so that the first
    // relaxation from the source yields the edge weight itself.
    dist[static_cast<std::size_t>(source)] = -inf;

    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({-inf, source});
    while (!heap.empty()) {
        const auto [val, u] = heap.top();
        heap.pop();
        if (settled[static_cast<std::size_t>(u)]) continue;
        settled[static_cast<std::size_t>(u)] = 1;
        if (u == target) break;
        for (EdgeId e : g.adjacency[static_cast<std::size_t>(u)]) {
            const VertexId v = g.directed ? g.edges[static_cast<std::size_t>(e)].head
                                          : g.other_end(e, u);
            if (settled[static_cast<std::size_t>(v)]) continue;
            const double cand = std::max(val, weights[static_cast<std::size_t>(e)]);
            if (cand < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = cand;
                pred[static_cast<std::size_t>(v)] = e;
                heap.push({cand, v});
            }
        }
    }
    if (!settled[static_cast<std::size_t>(target)])
        throw unreachable_error("target not reachable from source");

    Path path;
    path.source = source;
    path.target = target;
    for (VertexId v = target; v != source;) {
        const EdgeId e = pred[static_cast<std::size_t>(v)];
        path.edges.push_back(e);
        v = g.directed ? g.edges[static_cast<std::size_t>(e)].tail : g.other_end(e, v);
    }
    std::reverse(path.edges.begin(), path.edges.end());
    return detail::finish_result(g, weights, std::move(path));
}

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool merge(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
};

} // namespace detail

// Undirected bottleneck query through a minimum spanning tree: the unique
// tree path between two vertices carries the minimax edge of the whole graph.
// Kruskal over edges sorted by (weight, index), then a parent-pointer walk;
// no LCA preprocessing since one query is made per call.
inline OracleResult minimax_mst(const Graph& g, std::span<const double> weights,
                                VertexId source, VertexId target) {
    if (g.directed) throw std::invalid_argument("minimax_mst: directed graph supplied");
    if (source < 0 || source >= g.vertex_count || target < 0 || target >= g.vertex_count)
        throw std::invalid_argument("minimax_mst: vertex out of range");
    if (weights.size() != static_cast<std::size_t>(g.edge_count()))
        throw std::invalid_argument("minimax_mst: weight vector size mismatch");
    if (source == target) throw unreachable_error("no simple path from a vertex to itself");

    std::vector<EdgeId> order(static_cast<std::size_t>(g.edge_count()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
        const double wa = weights[static_cast<std::size_t>(a)];
        const double wb = weights[static_cast<std::size_t>(b)];
        return wa != wb ? wa < wb : a < b;
    });

    detail::UnionFind uf(static_cast<std::size_t>(g.vertex_count));
    std::vector<std::vector<EdgeId>> tree(static_cast<std::size_t>(g.vertex_count));
    for (EdgeId e : order) {
        const Edge& ed = g.edges[static_cast<std::size_t>(e)];
        if (uf.merge(static_cast<std::size_t>(ed.tail), static_cast<std::size_t>(ed.head))) {
            tree[static_cast<std::size_t>(ed.tail)].push_back(e);
            tree[static_cast<std::size_t>(ed.head)].push_back(e);
        }
    }
    if (uf.find(static_cast<std::size_t>(source)) != uf.find(static_cast<std::size_t>(target)))
        throw unreachable_error("source and target are in different components");

    // Root the tree at the source, then walk parent pointers up from target.
    std::vector<EdgeId> parent_edge(static_cast<std::size_t>(g.vertex_count), -1);
    std::vector<char> visited(static_cast<std::size_t>(g.vertex_count), 0);
    std::vector<VertexId> stack = {source};
    visited[static_cast<std::size_t>(source)] = 1;
    while (!stack.empty()) {
        const VertexId u = stack.back();
        stack.pop_back();
        for (EdgeId e : tree[static_cast<std::size_t>(u)]) {
            const VertexId v = g.other_end(e, u);
            if (visited[static_cast<std::size_t>(v)]) continue;
            visited[static_cast<std::size_t>(v)] = 1;
            parent_edge[static_cast<std::size_t>(v)] = e;
            stack.push_back(v);
        }
    }

    Path path;
    path.source = source;
    path.target = target;
    for (VertexId v = target; v != source;) {
        const EdgeId e = parent_edge[static_cast<std::size_t>(v)];
        path.edges.push_back(e);
        v = g.other_end(e, v);
    }
    std::reverse(path.edges.begin(), path.edges.end());
    return detail::finish_result(g, weights, std::move(path));
}

// Dispatches to the deterministic oracle suited to the graph type.
inline OracleResult minimax_oracle(const Graph& g, std::span<const double> weights,
                                   VertexId source, VertexId target) {
    return g.directed ? minimax_dijkstra(g, weights, source, target)
                      : minimax_mst(g, weights, source, target);
}

namespace detail {

// Depth-first enumeration of simple source->target paths. Exploring
// adjacency lists in order visits edge indices ascending, so paths are
// emitted in lexicographic edge-index order.
template <typename Visit>
inline void for_each_simple_path(const Graph& g, VertexId source, VertexId target,
                                 std::size_t cap, Visit&& visit) {
    if (source < 0 || source >= g.vertex_count || target < 0 || target >= g.vertex_count)
        throw std::invalid_argument("path enumeration: vertex out of range");
    std::vector<char> on_path(static_cast<std::size_t>(g.vertex_count), 0);
    std::vector<EdgeId> edges;
    std::size_t count = 0;
    std::function<void(VertexId)> dfs = [&](VertexId u) {
        if (u == target) {
            if (++count > cap) throw path_cap_error("more than " + std::to_string(cap) + " simple paths");
            visit(edges);
            return;
        }
        on_path[static_cast<std::size_t>(u)] = 1;
        for (EdgeId e : g.adjacency[static_cast<std::size_t>(u)]) {
            const VertexId v = g.directed ? g.edges[static_cast<std::size_t>(e)].head
                                          : g.other_end(e, u);
            if (on_path[static_cast<std::size_t>(v)]) continue;
            edges.push_back(e);
            dfs(v);
            edges.pop_back();
        }
        on_path[static_cast<std::size_t>(u)] = 0;
    };
    if (source != target) dfs(source);
}

} // namespace detail

// All simple source->target paths in lexicographic edge-index order; throws
// path_cap_error if more than `cap` exist. An unreachable target yields an
// empty list.
inline std::vector<Path> enumerate_paths(const Graph& g, VertexId source, VertexId target,
                                         std::size_t cap = 1'000'000) {
    if (cap < 1) throw std::invalid_argument("enumerate_paths: cap must be >= 1");
    std::vector<Path> out;
    detail::for_each_simple_path(g, source, target, cap, [&](const std::vector<EdgeId>& edges) {
        out.push_back(Path{edges, source, target});
    });
    return out;
}

// Literal realization of the minimax definition: enumerate every simple path
// and keep the one with the smallest maximum edge weight, breaking ties by
// the lexicographically smallest edge-index sequence. Reference oracle for
// the label-setting and MST routes; intended for small graphs.
inline OracleResult brute_force_minimax(const Graph& g, std::span<const double> weights,
                                        VertexId source, VertexId target,
                                        std::size_t cap = 1'000'000) {
    if (weights.size() != static_cast<std::size_t>(g.edge_count()))
        throw std::invalid_argument("brute_force_minimax: weight vector size mismatch");
    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    std::vector<EdgeId> best_edges;
    detail::for_each_simple_path(g, source, target, cap, [&](const std::vector<EdgeId>& edges) {
        double m = -std::numeric_limits<double>::infinity();
        for (EdgeId e : edges) m = std::max(m, weights[static_cast<std::size_t>(e)]);
        if (!found || m < best) {
            found = true;
            best = m;
            best_edges = edges;
        }
    });
    if (!found) throw unreachable_error("target not reachable from source");
    return detail::finish_result(g, weights, Path{std::move(best_edges), source, target});
}

} // namespace mmb
