#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"

#include "mmb/experiment.hpp"
#include "mmb/io.hpp"
#include "mmb/minimax.hpp"

namespace {

mmb::FileFormat format_for(const std::string& path, const std::string& explicit_format) {
    if (explicit_format == "edgelist") return mmb::FileFormat::edge_list;
    if (explicit_format == "pajek") return mmb::FileFormat::pajek;
    if (!explicit_format.empty())
        throw mmb::config_error("format: expected edgelist or pajek, got `" + explicit_format + "`");
    return path.size() > 4 && path.substr(path.size() - 4) == ".net" ? mmb::FileFormat::pajek
                                                                     : mmb::FileFormat::edge_list;
}

void print_oracle_result(const mmb::Network& net, const mmb::OracleResult& res) {
    const mmb::Graph& g = net.graph;
    std::cout << "path:";
    for (mmb::EdgeId e : res.path.edges) {
        const mmb::Edge& ed = g.edges[static_cast<std::size_t>(e)];
        std::cout << ' ' << g.label(ed.tail) << (g.directed ? "->" : "--") << g.label(ed.head)
                  << "[" << e << "]";
    }
    std::cout << '\n';
    const mmb::Edge& b = g.edges[static_cast<std::size_t>(res.bottleneck_edge)];
    std::cout << "bottleneck_edge: " << res.bottleneck_edge << " (" << g.label(b.tail)
              << (g.directed ? "->" : "--") << g.label(b.head) << ")\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", res.bottleneck_value);
    std::cout << "bottleneck_value: " << buf << '\n';
}

int run_command(const std::string& config_path,
                const std::vector<std::pair<std::string, std::string>>& overrides,
                unsigned threads) {
    mmb::ExperimentConfig cfg = mmb::parse_config_file(config_path);
    for (const auto& [key, value] : overrides) mmb::apply_setting(cfg, key, value);
    mmb::run_experiment_files(cfg, threads);
    std::cout << "wrote " << cfg.out_dir << "/{regret,summary,visits,vertices}.csv and manifest.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online bottleneck identification in stochastic networks: "
                 "minimax-path semi-bandit simulations"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path;
    run->add_option("config", config_path, "Path to a `key = value` config file")->required();
    unsigned threads = 1;
    run->add_option("--threads", threads, "Worker threads (0 = auto); outputs are identical "
                                          "for every value");
    // Every config key is overridable by a flag of the same name.
    static const char* kKeys[] = {"graph", "format", "directed", "source", "target",
                                  "agents", "horizon", "reps", "seed", "noise_sd",
                                  "prior_sd", "env_prior_sd", "bucb_schedule", "bucb_p_min",
                                  "mc_samples", "path_cap", "regret", "out"};
    auto overrides = std::make_shared<std::vector<std::pair<std::string, std::string>>>();
    for (const char* key : kKeys) {
        run->add_option_function<std::string>(
            std::string("--") + key,
            [overrides, key](const std::string& v) { overrides->emplace_back(key, v); },
            std::string("Override config key `") + key + "`");
    }
    bool fixed_instance = false;
    run->add_flag("--fixed_instance,--fixed-instance", fixed_instance,
                  "Keep one theta* draw across repetitions");

    // bottleneck
    auto* bn = app.add_subcommand("bottleneck", "One-shot minimax path query on a network file");
    std::string bn_graph, bn_source, bn_target, bn_format, bn_weights = "prior_mean";
    bool bn_directed = false;
    bn->add_option("graph", bn_graph, "Network file")->required();
    bn->add_option("source", bn_source, "Source vertex")->required();
    bn->add_option("target", bn_target, "Target vertex")->required();
    bn->add_option("--format", bn_format, "edgelist or pajek (default: by extension)");
    bn->add_flag("--directed", bn_directed, "Treat edge-list input as directed");
    bn->add_option("--weights", bn_weights, "Weight column: prior_mean, noise_sd or prior_sd");

    // validate
    auto* val = app.add_subcommand("validate", "Load a network file and report its shape");
    std::string val_graph, val_format;
    bool val_directed = false;
    val->add_option("graph", val_graph, "Network file")->required();
    val->add_option("--format", val_format, "edgelist or pajek (default: by extension)");
    val->add_flag("--directed", val_directed, "Treat edge-list input as directed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            if (fixed_instance) overrides->emplace_back("fixed_instance", "true");
            return run_command(config_path, *overrides, threads);
        }
        if (bn->parsed()) {
            const mmb::FileFormat fmt = format_for(bn_graph, bn_format);
            const mmb::ParamDefaults defaults{1.0, 1.0};
            const mmb::Network net = mmb::load_network_file(
                bn_graph, fmt,
                fmt == mmb::FileFormat::edge_list ? std::optional<bool>(bn_directed) : std::nullopt,
                defaults);
            const mmb::VertexId s = mmb::detail::resolve_vertex(net.graph, bn_source);
            const mmb::VertexId t = mmb::detail::resolve_vertex(net.graph, bn_target);
            const std::vector<double>* w = &net.params.prior_mean;
            if (bn_weights == "noise_sd") w = &net.params.noise_sd;
            else if (bn_weights == "prior_sd") w = &net.params.prior_sd;
            else if (bn_weights != "prior_mean")
                throw mmb::config_error("weights: expected prior_mean, noise_sd or prior_sd");
            print_oracle_result(net, mmb::minimax_oracle(net.graph, *w, s, t));
            return 0;
        }
        if (val->parsed()) {
            const mmb::FileFormat fmt = format_for(val_graph, val_format);
            const mmb::ParamDefaults defaults{1.0, 1.0};
            const mmb::Network net = mmb::load_network_file(
                val_graph, fmt,
                fmt == mmb::FileFormat::edge_list ? std::optional<bool>(val_directed) : std::nullopt,
                defaults);
            std::int64_t parallel = 0;
            std::map<std::pair<mmb::VertexId, mmb::VertexId>, int> seen;
            for (const mmb::Edge& e : net.graph.edges) {
                auto key = net.graph.directed
                               ? std::make_pair(e.tail, e.head)
                               : std::make_pair(std::min(e.tail, e.head), std::max(e.tail, e.head));
                if (seen[key]++ > 0) ++parallel;
            }
            std::cout << "ok: " << (net.graph.directed ? "directed" : "undirected") << " |V|="
                      << net.graph.vertex_count << " |E|=" << net.graph.edge_count()
                      << " parallel_edges=" << parallel << '\n';
            return 0;
        }
    } catch (const mmb::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const mmb::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
