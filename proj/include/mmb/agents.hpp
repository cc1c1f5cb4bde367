#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "mmb/environment.hpp"
#include "mmb/gaussian.hpp"
#include "mmb/graph.hpp"
#include "mmb/minimax.hpp"
#include "mmb/rng.hpp"

namespace mmb {

enum class Policy { greedy, greedy_exact, ts_approx, ts_exact, bayes_ucb };

inline const char* policy_name(Policy p) {
    switch (p) {
        case Policy::greedy: return "greedy";
        case Policy::greedy_exact: return "greedy_exact";
        case Policy::ts_approx: return "ts";
        case Policy::ts_exact: return "ts_exact";
        case Policy::bayes_ucb: return "bucb";
    }
    return "?";
}

inline std::optional<Policy> parse_policy(const std::string& name) {
    if (name == "greedy") return Policy::greedy;
    if (name == "greedy_exact") return Policy::greedy_exact;
    if (name == "ts") return Policy::ts_approx;
    if (name == "ts_exact") return Policy::ts_exact;
    if (name == "bucb") return Policy::bayes_ucb;
    return std::nullopt;
}

// Schedule of the lower posterior quantile used for optimistic cost
// estimates. Default is p_t = 1/t; alternatives are a fixed p or
// p_t = 1/(t log^c T). Always clamped to [p_min, 0.5].
struct QuantileSchedule {
    enum class Kind { inv_t, fixed, inv_t_log };
    Kind kind = Kind::inv_t;
    double fixed_p = 0.05;
    double log_c = 1.0;
    double p_min = 1e-6;

    double p_at(std::int64_t t, std::int64_t horizon) const {
        double p = 0.5;
        switch (kind) {
            case Kind::inv_t: p = 1.0 / static_cast<double>(t); break;
            case Kind::fixed: p = fixed_p; break;
            case Kind::inv_t_log: {
                const double lg = std::log(std::max<double>(static_cast<double>(horizon), 2.0));
                p = 1.0 / (static_cast<double>(t) * std::pow(lg, log_c));
                break;
            }
        }
        return std::clamp(p, p_min, 0.5);
    }
};

struct AgentOptions {
    std::size_t path_cap = 1'000'000;
    std::int64_t mc_samples = 10'000;
    QuantileSchedule schedule;
};

struct AgentState {
    Policy policy = Policy::greedy;
    std::vector<EdgeBelief> beliefs;
    std::int64_t step = 0; // number of completed post-initialization rounds
};

inline AgentState make_agent(Policy policy, const EdgeParams& params) {
    AgentState st;
    st.policy = policy;
    const std::size_t d = params.prior_mean.size();
    st.beliefs.reserve(d);
    for (std::size_t e = 0; e < d; ++e) {
        EdgeBelief b;
        b.mu = params.prior_mean[e];
        b.var = params.prior_sd[e] * params.prior_sd[e];
        b.noise_var = params.noise_sd[e] * params.noise_sd[e];
        st.beliefs.push_back(b);
    }
    return st;
}

struct SelectResult {
    Path path;
    double objective = 0.0; // the score the policy minimized for this path
};

struct StepOutcome {
    Path chosen;
    std::vector<std::pair<EdgeId, double>> feedback;
    double objective_value = 0.0;
};

namespace detail {

inline std::vector<double> posterior_means(const AgentState& st) {
    std::vector<double> m(st.beliefs.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = st.beliefs[i].mu;
    return m;
}

// BFS path avoiding a vertex set; deterministic (adjacency order, first
// parent kept). Returns false if target is unreachable under the constraint.
inline bool bfs_path(const Graph& g, VertexId from, VertexId to, const std::vector<char>& blocked,
                     std::vector<EdgeId>& out_edges) {
    out_edges.clear();
    if (blocked[static_cast<std::size_t>(from)] || blocked[static_cast<std::size_t>(to)]) return false;
    if (from == to) return true;
    std::vector<EdgeId> parent(static_cast<std::size_t>(g.vertex_count), -1);
    std::vector<char> seen(static_cast<std::size_t>(g.vertex_count), 0);
    seen[static_cast<std::size_t>(from)] = 1;
    std::deque<VertexId> queue = {from};
    while (!queue.empty()) {
        const VertexId u = queue.front();
        queue.pop_front();
        for (EdgeId e : g.adjacency[static_cast<std::size_t>(u)]) {
            const VertexId v = g.directed ? g.edges[static_cast<std::size_t>(e)].head
                                          : g.other_end(e, u);
            if (seen[static_cast<std::size_t>(v)] || blocked[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = 1;
            parent[static_cast<std::size_t>(v)] = e;
            if (v == to) {
                for (VertexId w = to; w != from;) {
                    const EdgeId pe = parent[static_cast<std::size_t>(w)];
                    out_edges.push_back(pe);
                    w = g.directed ? g.edges[static_cast<std::size_t>(pe)].tail : g.other_end(pe, w);
                }
                std::reverse(out_edges.begin(), out_edges.end());
                return true;
            }
            queue.push_back(v);
        }
    }
    return false;
}

// Removes cycles from a walk by splicing out the loop between repeated
// vertices, keeping the leftmost occurrence.
inline Path decycle_walk(const Graph& g, const Path& walk) {
    std::vector<VertexId> verts = path_vertices(g, walk);
    std::vector<VertexId> kept_v = {walk.source};
    std::vector<EdgeId> kept_e;
    for (std::size_t i = 1; i < verts.size(); ++i) {
        const VertexId v = verts[i];
        const auto it = std::find(kept_v.begin(), kept_v.end(), v);
        if (it != kept_v.end()) {
            const std::size_t j = static_cast<std::size_t>(it - kept_v.begin());
            kept_v.resize(j + 1);
            kept_e.resize(j);
        } else {
            kept_v.push_back(v);
            kept_e.push_back(walk.edges[i - 1]);
        }
    }
    return Path{std::move(kept_e), walk.source, walk.target};
}

// Tries to build a simple source->target path traversing edge `e` from
// vertex `u` to vertex `v`. First attempt: BFS prefix + e + BFS suffix,
// de-cycled; if the splice drops `e`, retry with vertex-disjoint BFS legs.
inline std::optional<Path> simple_path_through(const Graph& g, VertexId source, VertexId target,
                                               EdgeId e, VertexId u, VertexId v) {
    std::vector<char> none(static_cast<std::size_t>(g.vertex_count), 0);
    std::vector<EdgeId> prefix, suffix;
    if (bfs_path(g, source, u, none, prefix) && bfs_path(g, v, target, none, suffix)) {
        Path walk;
        walk.source = source;
        walk.target = target;
        walk.edges = prefix;
        walk.edges.push_back(e);
        walk.edges.insert(walk.edges.end(), suffix.begin(), suffix.end());
        Path simple = decycle_walk(g, walk);
        if (std::find(simple.edges.begin(), simple.edges.end(), e) != simple.edges.end() &&
            validate_path(g, simple))
            return simple;
    }
    // Disjoint construction: prefix avoids v, suffix avoids every prefix vertex.
    std::vector<char> blocked(static_cast<std::size_t>(g.vertex_count), 0);
    blocked[static_cast<std::size_t>(v)] = 1;
    if (!bfs_path(g, source, u, blocked, prefix)) return std::nullopt;
    std::fill(blocked.begin(), blocked.end(), 0);
    Path result;
    result.source = source;
    result.target = target;
    result.edges = prefix;
    result.edges.push_back(e);
    VertexId cur = source;
    blocked[static_cast<std::size_t>(cur)] = 1;
    for (EdgeId pe : prefix) {
        cur = g.directed ? g.edges[static_cast<std::size_t>(pe)].head : g.other_end(pe, cur);
        blocked[static_cast<std::size_t>(cur)] = 1;
    }
    if (!bfs_path(g, v, target, blocked, suffix)) return std::nullopt;
    result.edges.insert(result.edges.end(), suffix.begin(), suffix.end());
    if (!validate_path(g, result)) return std::nullopt;
    return result;
}

} // namespace detail

struct CoverResult {
    std::vector<Path> paths;
    std::vector<char> usable; // per edge: lies on at least one cover path
};

// Initialization round: a deterministic set of valid source->target paths
// whose union covers every edge that can be placed on a simple
// source->target path. Uncovered (unusable) edges are never part of any
// feasible super arm and are excluded from the arm set. Edges are processed
// in file order; edges already covered by an earlier path are skipped.
inline CoverResult init_cover(const Graph& g, VertexId source, VertexId target) {
    if (source < 0 || source >= g.vertex_count || target < 0 || target >= g.vertex_count)
        throw std::invalid_argument("init_cover: vertex out of range");
    CoverResult cover;
    cover.usable.assign(static_cast<std::size_t>(g.edge_count()), 0);
    {
        std::vector<char> none(static_cast<std::size_t>(g.vertex_count), 0);
        std::vector<EdgeId> probe;
        if (source == target || !detail::bfs_path(g, source, target, none, probe))
            throw unreachable_error("init_cover: target not reachable from source");
    }
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (cover.usable[static_cast<std::size_t>(e)]) continue;
        const Edge& ed = g.edges[static_cast<std::size_t>(e)];
        std::optional<Path> path =
            detail::simple_path_through(g, source, target, e, ed.tail, ed.head);
        if (!path && !g.directed)
            path = detail::simple_path_through(g, source, target, e, ed.head, ed.tail);
        if (!path) continue; // flagged unusable: on no simple source->target path
        for (EdgeId pe : path->edges) cover.usable[static_cast<std::size_t>(pe)] = 1;
        cover.paths.push_back(std::move(*path));
    }
    return cover;
}

// Plays every cover path once, updating beliefs from the observed feedback.
// These plays happen before t = 1 and are not part of the regret horizon.
inline void run_init(AgentState& st, const Environment& env, const CoverResult& cover, Rng& rng) {
    for (const Path& p : cover.paths) {
        for (const auto& [e, w] : env_feedback(env, p, rng)) {
            const std::size_t i = static_cast<std::size_t>(e);
            st.beliefs[i] = posterior_update(st.beliefs[i], w);
        }
    }
}

// Greedy selection: oracle minimax on the current posterior means.
inline SelectResult select_greedy(const AgentState& st, const Graph& g,
                                  VertexId source, VertexId target) {
    const std::vector<double> means = detail::posterior_means(st);
    OracleResult res = minimax_oracle(g, means, source, target);
    return {std::move(res.path), res.bottleneck_value};
}

namespace detail {

// Scores a super arm under the exact objective E[max_i C_i] with
// C_i ~ N(theta_i, sigma_i^2): closed form for short paths, Monte Carlo with
// a fixed substream otherwise.
inline double exact_objective(const std::vector<EdgeId>& edges, const std::vector<double>& theta,
                              const std::vector<EdgeBelief>& beliefs, std::int64_t mc_samples,
                              std::uint64_t mc_seed) {
    GaussianVec comp;
    comp.means.reserve(edges.size());
    comp.vars.reserve(edges.size());
    for (EdgeId e : edges) {
        comp.means.push_back(theta[static_cast<std::size_t>(e)]);
        comp.vars.push_back(beliefs[static_cast<std::size_t>(e)].noise_var);
    }
    if (comp.size() <= 3) return expected_max_exact(comp);
    Rng rng(mc_seed);
    return expected_max_mc(comp, mc_samples, rng).value;
}

inline SelectResult argmin_exact(const Graph& g, VertexId source, VertexId target,
                                 const std::vector<double>& theta,
                                 const std::vector<EdgeBelief>& beliefs,
                                 const AgentOptions& opts, std::uint64_t mc_seed) {
    const std::vector<Path> paths = enumerate_paths(g, source, target, opts.path_cap);
    if (paths.empty()) throw unreachable_error("target not reachable from source");
    SelectResult best;
    bool first = true;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double score = exact_objective(paths[i].edges, theta, beliefs, opts.mc_samples,
                                             substream_seed(mc_seed, i));
        if (first || score < best.objective) {
            first = false;
            best.path = paths[i];
            best.objective = score;
        }
    }
    return best;
}

} // namespace detail

// Exact-objective greedy: enumerates super arms and minimizes E[max C_i]
// under the posterior means. Toy scale only (bounded by path_cap).
inline SelectResult select_greedy_exact(const AgentState& st, const Graph& g, VertexId source,
                                        VertexId target, const AgentOptions& opts,
                                        std::uint64_t mc_seed) {
    return detail::argmin_exact(g, source, target, detail::posterior_means(st), st.beliefs, opts,
                                mc_seed);
}

// Approximate Thompson Sampling: draw theta~ from every posterior, then run
// the deterministic minimax oracle on the sampled means.
inline SelectResult select_ts_approx(const AgentState& st, const Graph& g, VertexId source,
                                     VertexId target, Rng& rng) {
    std::vector<double> theta(st.beliefs.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = sample_gaussian(st.beliefs[i].mu, std::sqrt(st.beliefs[i].var), rng);
    OracleResult res = minimax_oracle(g, theta, source, target);
    return {std::move(res.path), res.bottleneck_value};
}

// Exact Thompson Sampling: draw theta~, then minimize the exact expected
// cost over all enumerated super arms (lexicographic tie-break).
inline SelectResult select_ts_exact(const AgentState& st, const Graph& g, VertexId source,
                                    VertexId target, Rng& rng, const AgentOptions& opts) {
    std::vector<double> theta(st.beliefs.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = sample_gaussian(st.beliefs[i].mu, std::sqrt(st.beliefs[i].var), rng);
    const std::uint64_t mc_seed = rng();
    return detail::argmin_exact(g, source, target, theta, st.beliefs, opts, mc_seed);
}

// BayesUCB for cost minimization: optimistic per-edge values are lower
// posterior quantiles at the scheduled p_t, fed through the minimax oracle.
inline SelectResult select_bayes_ucb(const AgentState& st, const Graph& g, VertexId source,
                                     VertexId target, std::int64_t t, std::int64_t horizon,
                                     const QuantileSchedule& schedule) {
    if (t < 1) throw std::invalid_argument("select_bayes_ucb: t must be >= 1");
    const double p = schedule.p_at(t, horizon);
    std::vector<double> q(st.beliefs.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = gaussian_quantile(st.beliefs[i].mu, std::sqrt(st.beliefs[i].var), p);
    OracleResult res = minimax_oracle(g, q, source, target);
    return {std::move(res.path), res.bottleneck_value};
}

// One protocol round: select per policy, draw semi-bandit feedback, update
// the posterior of every played edge, advance t. Beliefs of unplayed edges
// are untouched.
inline StepOutcome run_step(AgentState& st, const Environment& env, VertexId source,
                            VertexId target, Rng& rng, const AgentOptions& opts,
                            std::int64_t horizon) {
    st.step += 1;
    const Graph& g = *env.graph;
    SelectResult sel;
    switch (st.policy) {
        case Policy::greedy: sel = select_greedy(st, g, source, target); break;
        case Policy::greedy_exact:
            sel = select_greedy_exact(st, g, source, target, opts, rng());
            break;
        case Policy::ts_approx: sel = select_ts_approx(st, g, source, target, rng); break;
        case Policy::ts_exact: sel = select_ts_exact(st, g, source, target, rng, opts); break;
        case Policy::bayes_ucb:
            sel = select_bayes_ucb(st, g, source, target, st.step, horizon, opts.schedule);
            break;
    }
    StepOutcome out;
    out.feedback = env_feedback(env, sel.path, rng);
    for (const auto& [e, w] : out.feedback) {
        const std::size_t i = static_cast<std::size_t>(e);
        st.beliefs[i] = posterior_update(st.beliefs[i], w);
    }
    out.chosen = std::move(sel.path);
    out.objective_value = sel.objective;
    return out;
}

} // namespace mmb
