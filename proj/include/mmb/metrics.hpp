#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmb/agents.hpp"
#include "mmb/gaussian.hpp"
#include "mmb/graph.hpp"
#include "mmb/minimax.hpp"

namespace mmb {

// Per-repetition record of one agent's run: per-step instant and cumulative
// regret, the chosen path (as an id into the trace's path registry), and
// per-edge visit counts.
struct StepRecord {
    std::int64_t t = 0;
    double instant = 0.0;
    double cumulative = 0.0;
    std::int32_t path_id = -1;
};

struct RegretTrace {
    std::string agent;
    int repetition = 0;
    std::vector<StepRecord> steps;
    std::vector<std::vector<EdgeId>> paths; // registry referenced by path_id
    std::vector<std::int64_t> visit_counts; // per edge, summed over steps

    std::int32_t add_path(const std::vector<EdgeId>& edges) {
        for (std::size_t i = 0; i < paths.size(); ++i)
            if (paths[i] == edges) return static_cast<std::int32_t>(i);
        paths.push_back(edges);
        return static_cast<std::int32_t>(paths.size() - 1);
    }
};

// The best achievable approximate cost min_a max_{i in a} theta*_i, computed
// once per repetition by the deterministic oracle.
inline double approx_optimum(const Graph& g, std::span<const double> theta_star,
                             VertexId source, VertexId target) {
    return minimax_oracle(g, theta_star, source, target).bottleneck_value;
}

// Per-step approximate regret of a chosen super arm against a precomputed
// optimum; nonnegative for any valid path.
inline double approx_instant_regret(std::span<const double> theta_star, const Path& chosen,
                                    double optimum) {
    double m = -std::numeric_limits<double>::infinity();
    for (EdgeId e : chosen.edges) m = std::max(m, theta_star[static_cast<std::size_t>(e)]);
    return m - optimum;
}

inline double approx_instant_regret(std::span<const double> theta_star, const Path& chosen,
                                    const Graph& g, VertexId source, VertexId target) {
    return approx_instant_regret(theta_star, chosen,
                                 approx_optimum(g, theta_star, source, target));
}

// Exact per-step regret E[c(a_t)] - min_a E[c(a)] under the true means.
// The minimum is taken over all enumerated super arms (toy scale). Paths of
// up to three edges are scored in closed form; longer ones either fail
// (exact mode) or are scored by seeded Monte Carlo with the standard error
// reported (mc mode).
class ExactRegretScorer {
public:
    enum class Mode { exact, mc };

    struct Regret {
        double value = 0.0;
        double std_error = 0.0;
    };

    ExactRegretScorer(const Graph& g, std::span<const double> theta_star,
                      std::span<const double> noise_sd, VertexId source, VertexId target,
                      Mode mode = Mode::exact, std::size_t path_cap = 1'000'000,
                      std::int64_t mc_samples = 10'000, std::uint64_t seed = 0)
        : theta_star_(theta_star.begin(), theta_star.end()),
          noise_sd_(noise_sd.begin(), noise_sd.end()),
          mode_(mode),
          mc_samples_(mc_samples),
          seed_(seed) {
        const std::vector<Path> paths = enumerate_paths(g, source, target, path_cap);
        if (paths.empty()) throw unreachable_error("exact regret: no source->target path");
        bool first = true;
        for (const Path& p : paths) {
            const auto [value, se] = score(p.edges);
            if (first || value < best_value_) {
                first = false;
                best_value_ = value;
                best_se_ = se;
            }
        }
    }

    double optimum() const { return best_value_; }

    Regret instant(const Path& chosen) const {
        const auto [value, se] = score(chosen.edges);
        return {value - best_value_, std::sqrt(se * se + best_se_ * best_se_)};
    }

private:
    std::pair<double, double> score(const std::vector<EdgeId>& edges) const {
        const auto it = cache_.find(edges);
        if (it != cache_.end()) return it->second;
        GaussianVec comp;
        comp.means.reserve(edges.size());
        comp.vars.reserve(edges.size());
        for (EdgeId e : edges) {
            const std::size_t i = static_cast<std::size_t>(e);
            comp.means.push_back(theta_star_[i]);
            comp.vars.push_back(noise_sd_[i] * noise_sd_[i]);
        }
        std::pair<double, double> result{0.0, 0.0};
        if (comp.size() <= 3) {
            result.first = expected_max_exact(comp);
        } else if (mode_ == Mode::exact) {
            throw std::runtime_error(
                "exact regret: super arm of " + std::to_string(comp.size()) +
                " edges has no closed form; use mc mode");
        } else {
            // One fixed substream per distinct path, derived from the path key.
            std::uint64_t key = seed_;
            for (EdgeId e : edges) key = substream_seed(key, static_cast<std::uint64_t>(e) + 1);
            Rng rng(key);
            const McEstimate est = expected_max_mc(comp, mc_samples_, rng);
            result = {est.value, est.std_error};
        }
        cache_.emplace(edges, result);
        return result;
    }

    std::vector<double> theta_star_;
    std::vector<double> noise_sd_;
    Mode mode_;
    std::int64_t mc_samples_;
    std::uint64_t seed_;
    double best_value_ = 0.0;
    double best_se_ = 0.0;
    mutable std::map<std::vector<EdgeId>, std::pair<double, double>> cache_;
};

// Cross-repetition aggregation: per-step mean and sample sd (n-1 denominator)
// of cumulative regret. All traces must share agent label and horizon.
struct AggregateCurve {
    std::string agent;
    std::int64_t horizon = 0;
    std::vector<double> mean;
    std::vector<double> sd;
};

inline AggregateCurve aggregate(std::span<const RegretTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
    AggregateCurve out;
    out.agent = traces[0].agent;
    out.horizon = static_cast<std::int64_t>(traces[0].steps.size());
    for (const RegretTrace& tr : traces) {
        if (tr.agent != out.agent) throw std::invalid_argument("aggregate: mismatched agent labels");
        if (static_cast<std::int64_t>(tr.steps.size()) != out.horizon)
            throw std::invalid_argument("aggregate: mismatched horizons");
    }
    const std::size_t T = static_cast<std::size_t>(out.horizon);
    const std::size_t R = traces.size();
    out.mean.assign(T, 0.0);
    out.sd.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        for (const RegretTrace& tr : traces) sum += tr.steps[t].cumulative;
        const double mean = sum / static_cast<double>(R);
        double ss = 0.0;
        for (const RegretTrace& tr : traces) {
            const double dlt = tr.steps[t].cumulative - mean;
            ss += dlt * dlt;
        }
        out.mean[t] = mean;
        out.sd[t] = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) : 0.0;
    }
    return out;
}

// Empirical check of the optimality gap between the exact-objective best
// super arm a* and the approximate-objective best a~*: the gap
// f(a~*) - f(a*) under the true means, against the sqrt(2 log d) bound with
// d the usable base-arm count. Exact scoring uses closed forms for short
// paths and deterministic quadrature otherwise. When any noise variance
// exceeds 1 the bound's premise is violated and the result is advisory.
struct GapCheck {
    double gap = 0.0;
    double bound = 0.0;
    bool holds = false;
    bool advisory = false;
    Path exact_best;
    Path approx_best;
};

inline GapCheck theorem2_gap_check(const Graph& g, std::span<const double> theta_star,
                                   std::span<const double> noise_sd, VertexId source,
                                   VertexId target, std::size_t path_cap = 1'000'000) {
    const std::vector<Path> paths = enumerate_paths(g, source, target, path_cap);
    if (paths.empty()) throw unreachable_error("gap check: no source->target path");

    auto fscore = [&](const Path& p) {
        GaussianVec comp;
        for (EdgeId e : p.edges) {
            const std::size_t i = static_cast<std::size_t>(e);
            comp.means.push_back(theta_star[i]);
            comp.vars.push_back(noise_sd[i] * noise_sd[i]);
        }
        return comp.size() <= 3 ? expected_max_exact(comp) : expected_max_quadrature(comp);
    };

    GapCheck check;
    double best = 0.0;
    bool first = true;
    for (const Path& p : paths) {
        const double f = fscore(p);
        if (first || f < best) {
            first = false;
            best = f;
            check.exact_best = p;
        }
    }
    check.approx_best = minimax_oracle(g, theta_star, source, target).path;
    check.gap = fscore(check.approx_best) - best;

    const CoverResult cover = init_cover(g, source, target);
    std::int64_t d = 0;
    for (char u : cover.usable) d += u;
    check.bound = std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::int64_t>(d, 1))));
    check.holds = check.gap <= check.bound + 1e-12;
    for (double sd : noise_sd)
        if (sd * sd > 1.0) check.advisory = true;
    return check;
}

} // namespace mmb
