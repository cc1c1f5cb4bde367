#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mmb/gaussian.hpp"
#include "mmb/graph.hpp"
#include "mmb/io.hpp"
#include "mmb/rng.hpp"

namespace mmb {

// Hidden ground truth for one repetition: fixed true edge means theta*, and
// the per-edge observation-noise sds. theta* never leaves this struct except
// through noisy feedback draws; agents must not read it.
struct Environment {
    const Graph* graph = nullptr;
    std::vector<double> theta_star;
    std::vector<double> noise_sd;
};

// Draws a fresh instance: theta*_e ~ N(mu_{e,0}, gen_sd_e^2). The generating
// sd defaults to the agent's prior sd (matched-prior setting); an override
// simulates prior mismatch, where the agent's assumed prior stays narrower
// (or wider) than the distribution actually generating the means.
inline Environment env_new_repetition(const Network& net,
                                      std::optional<double> gen_prior_sd, Rng& rng) {
    Environment env;
    env.graph = &net.graph;
    env.noise_sd = net.params.noise_sd;
    const std::size_t d = net.params.prior_mean.size();
    env.theta_star.resize(d);
    for (std::size_t e = 0; e < d; ++e) {
        const double sd = gen_prior_sd ? *gen_prior_sd : net.params.prior_sd[e];
        env.theta_star[e] = sample_gaussian(net.params.prior_mean[e], sd, rng);
    }
    return env;
}

// Semi-bandit feedback: one independent N(theta*_e, sigma_e^2) draw per edge
// of the played path, in path order.
inline std::vector<std::pair<EdgeId, double>> env_feedback(const Environment& env,
                                                           const Path& path, Rng& rng) {
    if (!validate_path(*env.graph, path))
        throw std::invalid_argument("env_feedback: invalid path");
    std::vector<std::pair<EdgeId, double>> fb;
    fb.reserve(path.edges.size());
    for (EdgeId e : path.edges) {
        const std::size_t i = static_cast<std::size_t>(e);
        fb.emplace_back(e, sample_gaussian(env.theta_star[i], env.noise_sd[i], rng));
    }
    return fb;
}

} // namespace mmb
