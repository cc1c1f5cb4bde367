#pragma once

#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mmb/agents.hpp"
#include "mmb/common.hpp"
#include "mmb/environment.hpp"
#include "mmb/io.hpp"
#include "mmb/metrics.hpp"
#include "mmb/rng.hpp"

namespace mmb {

enum class RegretKind { approx, exact, exact_mc };

// Full description of one experiment. Every field maps to a `key = value`
// line of the config file and to a CLI flag of the same name; the master
// seed determines all randomness.
struct ExperimentConfig {
    std::string graph_file;
    FileFormat format = FileFormat::edge_list;
    std::optional<bool> directed;
    std::string source = "random";
    std::string target = "random";
    std::vector<Policy> agents;
    std::int64_t horizon = 0;
    int reps = 1;
    std::uint64_t seed = 0;
    std::optional<double> noise_sd;     // default fill for files without a sigma column
    std::optional<double> prior_sd;     // default fill for varsigma0
    std::optional<double> env_prior_sd; // prior-mismatch mode: sd generating theta*
    QuantileSchedule schedule;
    std::int64_t mc_samples = 10'000;
    std::size_t path_cap = 1'000'000;
    RegretKind regret = RegretKind::approx;
    bool fixed_instance = false;
    std::string out_dir = "out";
};

namespace detail {

inline bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else return false;
    return true;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double_or_throw(const std::string& key, const std::string& v) {
    double out;
    if (!parse_double(v, out)) throw config_error(key + ": bad number `" + v + "`");
    return out;
}

inline std::int64_t parse_int_or_throw(const std::string& key, const std::string& v) {
    std::int64_t out;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw config_error(key + ": bad integer `" + v + "`");
    return out;
}

} // namespace detail

// Applies one `key = value` setting. Unknown keys are hard errors: a silent
// typo would corrupt an experiment.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "graph") cfg.graph_file = value;
    else if (key == "format") {
        if (value == "edgelist") cfg.format = FileFormat::edge_list;
        else if (value == "pajek") cfg.format = FileFormat::pajek;
        else throw config_error("format: expected edgelist or pajek, got `" + value + "`");
    } else if (key == "directed") {
        bool b;
        if (!detail::parse_bool(value, b)) throw config_error("directed: bad boolean `" + value + "`");
        cfg.directed = b;
    } else if (key == "source") cfg.source = value;
    else if (key == "target") cfg.target = value;
    else if (key == "agents") {
        cfg.agents.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            const auto p = parse_policy(item);
            if (!p) throw config_error("agents: unknown policy `" + item + "`");
            for (Policy existing : cfg.agents)
                if (existing == *p) throw config_error("agents: duplicate label `" + item + "`");
            cfg.agents.push_back(*p);
        }
        if (cfg.agents.empty()) throw config_error("agents: empty list");
    } else if (key == "horizon") cfg.horizon = detail::parse_int_or_throw(key, value);
    else if (key == "reps") cfg.reps = static_cast<int>(detail::parse_int_or_throw(key, value));
    else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int_or_throw(key, value));
    else if (key == "noise_sd") cfg.noise_sd = detail::parse_double_or_throw(key, value);
    else if (key == "prior_sd") cfg.prior_sd = detail::parse_double_or_throw(key, value);
    else if (key == "env_prior_sd") cfg.env_prior_sd = detail::parse_double_or_throw(key, value);
    else if (key == "bucb_schedule") {
        if (value == "inv_t") cfg.schedule.kind = QuantileSchedule::Kind::inv_t;
        else if (value.rfind("fixed:", 0) == 0) {
            cfg.schedule.kind = QuantileSchedule::Kind::fixed;
            cfg.schedule.fixed_p = detail::parse_double_or_throw(key, value.substr(6));
        } else if (value.rfind("inv_t_log:", 0) == 0) {
            cfg.schedule.kind = QuantileSchedule::Kind::inv_t_log;
            cfg.schedule.log_c = detail::parse_double_or_throw(key, value.substr(10));
        } else throw config_error("bucb_schedule: expected inv_t, fixed:<p> or inv_t_log:<c>");
    } else if (key == "bucb_p_min")
        cfg.schedule.p_min = detail::parse_double_or_throw(key, value);
    else if (key == "mc_samples") cfg.mc_samples = detail::parse_int_or_throw(key, value);
    else if (key == "path_cap")
        cfg.path_cap = static_cast<std::size_t>(detail::parse_int_or_throw(key, value));
    else if (key == "regret") {
        if (value == "approx") cfg.regret = RegretKind::approx;
        else if (value == "exact") cfg.regret = RegretKind::exact;
        else if (value == "exact_mc") cfg.regret = RegretKind::exact_mc;
        else throw config_error("regret: expected approx, exact or exact_mc");
    } else if (key == "fixed_instance") {
        bool b;
        if (!detail::parse_bool(value, b)) throw config_error("fixed_instance: bad boolean");
        cfg.fixed_instance = b;
    } else if (key == "out") cfg.out_dir = value;
    else throw config_error("unknown config key `" + key + "`");
}

// Flat `key = value` config file; `#` starts a comment.
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path + ": cannot open");
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = detail::trim(detail::strip_comment(line, '#'));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected `key = value`");
        const std::string key = detail::trim(content.substr(0, eq));
        const std::string value = detail::trim(content.substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const config_error& err) {
            throw config_error(path + ":" + std::to_string(lineno) + ": " + err.what());
        }
    }
    return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.graph_file.empty()) throw config_error("missing `graph`");
    if (cfg.agents.empty()) throw config_error("missing `agents`");
    if (cfg.horizon < 1) throw config_error("`horizon` must be >= 1");
    if (cfg.reps < 1) throw config_error("`reps` must be >= 1");
    if (cfg.format == FileFormat::edge_list && !cfg.directed)
        throw config_error("edge-list input requires `directed`");
}

struct RunResult {
    std::vector<RegretTrace> traces; // (agent-major, repetition-minor) order
    std::vector<std::uint64_t> sub_seeds; // aligned with traces
    VertexId source = -1;
    VertexId target = -1;
};

namespace detail {

// Stream tags for auxiliary randomness, kept distinct from the
// (agent, repetition) task grid.
constexpr std::uint32_t kEnvAgentTag = 0xffffffffu;
constexpr std::uint64_t kPairTag = 0x70616972ull;   // source/target selection
constexpr std::uint64_t kScorerTag = 0x73636f72ull; // exact-regret MC substreams

inline VertexId resolve_vertex(const Graph& g, const std::string& token) {
    for (VertexId v = 0; v < g.vertex_count; ++v)
        if (g.label(v) == token) return v;
    throw data_error("vertex `" + token + "` not found in graph");
}

inline std::vector<char> reachable_from(const Graph& g, VertexId s) {
    std::vector<char> seen(static_cast<std::size_t>(g.vertex_count), 0);
    std::vector<VertexId> stack = {s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
        const VertexId u = stack.back();
        stack.pop_back();
        for (EdgeId e : g.adjacency[static_cast<std::size_t>(u)]) {
            const VertexId v = g.directed ? g.edges[static_cast<std::size_t>(e)].head
                                          : g.other_end(e, u);
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

// Uniformly random reachable (source, target) pair under a fixed stream.
inline std::pair<VertexId, VertexId> random_pair(const Graph& g, std::uint64_t seed) {
    Rng rng(substream_seed(seed, kPairTag));
    const auto n = static_cast<std::uint64_t>(g.vertex_count);
    if (n < 2) throw data_error("graph too small for a random source/target pair");
    for (int attempt = 0; attempt < 4096; ++attempt) {
        const VertexId s = static_cast<VertexId>(rng() % n);
        const std::vector<char> seen = reachable_from(g, s);
        std::vector<VertexId> targets;
        for (VertexId v = 0; v < g.vertex_count; ++v)
            if (v != s && seen[static_cast<std::size_t>(v)]) targets.push_back(v);
        if (targets.empty()) continue;
        return {s, targets[rng() % targets.size()]};
    }
    throw data_error("no vertex with a reachable partner found");
}

} // namespace detail

// Runs every (agent, repetition) task. Each repetition's hidden instance is
// drawn from a repetition-only stream, so all agents face the same theta*
// within a repetition; each task otherwise owns an isolated RNG derived from
// seed_schedule. Tasks may execute on any number of worker threads without
// changing a single output bit.
inline RunResult run_experiment(const ExperimentConfig& cfg, const Network& net,
                                unsigned threads = 1) {
    validate_config(cfg);
    const Graph& g = net.graph;

    RunResult result;
    if (cfg.source == "random" || cfg.target == "random") {
        const auto [s, t] = detail::random_pair(g, cfg.seed);
        result.source = cfg.source == "random" ? s : detail::resolve_vertex(g, cfg.source);
        result.target = cfg.target == "random" ? t : detail::resolve_vertex(g, cfg.target);
        if (result.source == result.target)
            throw data_error("resolved source equals target");
    } else {
        result.source = detail::resolve_vertex(g, cfg.source);
        result.target = detail::resolve_vertex(g, cfg.target);
    }

    const CoverResult cover = init_cover(g, result.source, result.target);
    AgentOptions opts;
    opts.path_cap = cfg.path_cap;
    opts.mc_samples = cfg.mc_samples;
    opts.schedule = cfg.schedule;

    const std::size_t n_tasks = cfg.agents.size() * static_cast<std::size_t>(cfg.reps);
    result.traces.resize(n_tasks);
    result.sub_seeds.resize(n_tasks);

    auto run_task = [&](std::size_t task) {
        const std::size_t agent_idx = task / static_cast<std::size_t>(cfg.reps);
        const int rep = static_cast<int>(task % static_cast<std::size_t>(cfg.reps));
        const Policy policy = cfg.agents[agent_idx];
        const std::uint64_t task_seed =
            seed_schedule(cfg.seed, static_cast<std::uint32_t>(agent_idx),
                          static_cast<std::uint32_t>(rep));
        result.sub_seeds[task] = task_seed;

        const std::uint32_t instance_rep =
            cfg.fixed_instance ? 0u : static_cast<std::uint32_t>(rep);
        const std::uint64_t env_seed = seed_schedule(cfg.seed, detail::kEnvAgentTag, instance_rep);
        Rng env_rng(env_seed);
        const Environment env = env_new_repetition(net, cfg.env_prior_sd, env_rng);

        Rng rng(task_seed);
        AgentState agent = make_agent(policy, net.params);
        run_init(agent, env, cover, rng);

        std::optional<double> approx_opt;
        std::optional<ExactRegretScorer> scorer;
        if (cfg.regret == RegretKind::approx) {
            approx_opt = approx_optimum(g, env.theta_star, result.source, result.target);
        } else {
            scorer.emplace(g, env.theta_star, env.noise_sd, result.source, result.target,
                           cfg.regret == RegretKind::exact ? ExactRegretScorer::Mode::exact
                                                           : ExactRegretScorer::Mode::mc,
                           cfg.path_cap, cfg.mc_samples,
                           substream_seed(env_seed, detail::kScorerTag));
        }

        RegretTrace trace;
        trace.agent = policy_name(policy);
        trace.repetition = rep;
        trace.visit_counts.assign(static_cast<std::size_t>(g.edge_count()), 0);
        trace.steps.reserve(static_cast<std::size_t>(cfg.horizon));
        double cumulative = 0.0;
        for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
            const StepOutcome out =
                run_step(agent, env, result.source, result.target, rng, opts, cfg.horizon);
            const double instant = approx_opt
                                       ? approx_instant_regret(env.theta_star, out.chosen, *approx_opt)
                                       : scorer->instant(out.chosen).value;
            cumulative += instant;
            StepRecord rec;
            rec.t = t;
            rec.instant = instant;
            rec.cumulative = cumulative;
            rec.path_id = trace.add_path(out.chosen.edges);
            trace.steps.push_back(rec);
            for (EdgeId e : out.chosen.edges) ++trace.visit_counts[static_cast<std::size_t>(e)];
        }
        result.traces[task] = std::move(trace);
    };

    auto run_task_named = [&](std::size_t task) {
        try {
            run_task(task);
        } catch (const std::exception& err) {
            const std::size_t agent_idx = task / static_cast<std::size_t>(cfg.reps);
            const std::size_t rep = task % static_cast<std::size_t>(cfg.reps);
            throw std::runtime_error("agent " + std::string(policy_name(cfg.agents[agent_idx])) +
                                     " repetition " + std::to_string(rep) + ": " + err.what());
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n_tasks <= 1) {
        for (std::size_t task = 0; task < n_tasks; ++task) run_task_named(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        const unsigned n_workers = std::min<unsigned>(threads, static_cast<unsigned>(n_tasks));
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t task = next.fetch_add(1); task < n_tasks;
                     task = next.fetch_add(1)) {
                    try {
                        run_task_named(task);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        for (std::thread& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return result;
}

namespace detail {

// Locale-independent %.10g-style float formatting; keeps CSV goldens
// bit-stable across platforms.
inline std::string csv_double(double x) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
    return std::string(buf, end);
}

} // namespace detail

// Writes regret.csv, summary.csv, visits.csv, vertices.csv and
// manifest.json into `dir`, in deterministic (agent, repetition) order.
inline void write_results(const ExperimentConfig& cfg, const Network& net,
                          const RunResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Graph& g = net.graph;

    {
        std::ofstream out(fs::path(dir) / "regret.csv", std::ios::binary);
        out << "agent,repetition,t,instant,cumulative\n";
        for (const RegretTrace& tr : result.traces)
            for (const StepRecord& rec : tr.steps)
                out << tr.agent << ',' << tr.repetition << ',' << rec.t << ','
                    << detail::csv_double(rec.instant) << ','
                    << detail::csv_double(rec.cumulative) << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "summary.csv", std::ios::binary);
        out << "agent,T,mean,sd\n";
        const std::size_t R = static_cast<std::size_t>(cfg.reps);
        for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
            const AggregateCurve curve =
                aggregate(std::span(result.traces).subspan(a * R, R));
            out << curve.agent << ',' << curve.horizon << ','
                << detail::csv_double(curve.mean.back()) << ','
                << detail::csv_double(curve.sd.back()) << '\n';
        }
    }
    {
        std::ofstream out(fs::path(dir) / "visits.csv", std::ios::binary);
        out << "agent,edge_index,tail,head,count\n";
        const std::size_t R = static_cast<std::size_t>(cfg.reps);
        for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
            std::vector<std::int64_t> counts(static_cast<std::size_t>(g.edge_count()), 0);
            for (std::size_t r = 0; r < R; ++r) {
                const RegretTrace& tr = result.traces[a * R + r];
                for (std::size_t e = 0; e < counts.size(); ++e) counts[e] += tr.visit_counts[e];
            }
            for (EdgeId e = 0; e < g.edge_count(); ++e) {
                const Edge& ed = g.edges[static_cast<std::size_t>(e)];
                out << policy_name(cfg.agents[a]) << ',' << e << ',' << g.label(ed.tail) << ','
                    << g.label(ed.head) << ',' << counts[static_cast<std::size_t>(e)] << '\n';
            }
        }
    }
    {
        std::ofstream out(fs::path(dir) / "vertices.csv", std::ios::binary);
        out << "vertex_id,label\n";
        for (VertexId v = 0; v < g.vertex_count; ++v) out << v << ',' << g.label(v) << '\n';
    }
    {
        nlohmann::ordered_json man;
        man["config"]["graph"] = cfg.graph_file;
        man["config"]["format"] = cfg.format == FileFormat::edge_list ? "edgelist" : "pajek";
        man["config"]["directed"] = g.directed;
        man["config"]["source"] = cfg.source;
        man["config"]["target"] = cfg.target;
        std::vector<std::string> agent_names;
        for (Policy p : cfg.agents) agent_names.emplace_back(policy_name(p));
        man["config"]["agents"] = agent_names;
        man["config"]["horizon"] = cfg.horizon;
        man["config"]["reps"] = cfg.reps;
        man["config"]["seed"] = cfg.seed;
        if (cfg.noise_sd) man["config"]["noise_sd"] = *cfg.noise_sd;
        if (cfg.prior_sd) man["config"]["prior_sd"] = *cfg.prior_sd;
        if (cfg.env_prior_sd) man["config"]["env_prior_sd"] = *cfg.env_prior_sd;
        man["config"]["bucb_schedule"] =
            cfg.schedule.kind == QuantileSchedule::Kind::inv_t ? "inv_t"
            : cfg.schedule.kind == QuantileSchedule::Kind::fixed
                ? "fixed:" + detail::csv_double(cfg.schedule.fixed_p)
                : "inv_t_log:" + detail::csv_double(cfg.schedule.log_c);
        man["config"]["bucb_p_min"] = cfg.schedule.p_min;
        man["config"]["mc_samples"] = cfg.mc_samples;
        man["config"]["path_cap"] = cfg.path_cap;
        man["config"]["regret"] = cfg.regret == RegretKind::approx   ? "approx"
                                  : cfg.regret == RegretKind::exact ? "exact"
                                                                    : "exact_mc";
        man["config"]["fixed_instance"] = cfg.fixed_instance;
        man["resolved"]["source_id"] = result.source;
        man["resolved"]["source_label"] = g.label(result.source);
        man["resolved"]["target_id"] = result.target;
        man["resolved"]["target_label"] = g.label(result.target);
        man["graph"]["vertices"] = g.vertex_count;
        man["graph"]["edges"] = g.edge_count();
        nlohmann::ordered_json seeds;
        const std::size_t R = static_cast<std::size_t>(cfg.reps);
        for (std::size_t a = 0; a < cfg.agents.size(); ++a)
            for (std::size_t r = 0; r < R; ++r)
                seeds[std::string(policy_name(cfg.agents[a])) + "/" + std::to_string(r)] =
                    result.sub_seeds[a * R + r];
        man["sub_seeds"] = std::move(seeds);
        std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
        out << man.dump(2) << '\n';
    }
}

// Load, run, write: the `run` subcommand in one call.
inline RunResult run_experiment_files(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate_config(cfg);
    const ParamDefaults defaults{cfg.noise_sd, cfg.prior_sd};
    const Network net = load_network_file(cfg.graph_file, cfg.format, cfg.directed, defaults);
    RunResult result = run_experiment(cfg, net, threads);
    write_results(cfg, net, result, cfg.out_dir);
    return result;
}

} // namespace mmb
