#pragma once

#include <cstdint>
#include <random>

namespace mmb {

// All stochastic components draw from std::mt19937_64 streams. The engine is
// fully specified by the standard, so a (master seed, stream id) pair pins
// every draw of a run.
using Rng = std::mt19937_64;

// Finalizer of the splitmix64 generator. Bijective on uint64, which makes the
// derived-seed schedule below injective by construction.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Sub-seed for the (agent, repetition) task grid. Composition of bijections
// applied to distinct inputs, hence collision-free for any fixed master seed
// as long as agent and repetition each fit in 32 bits.
constexpr std::uint64_t seed_schedule(std::uint64_t master_seed,
                                      std::uint32_t agent_index,
                                      std::uint32_t repetition_index) noexcept {
    const std::uint64_t packed =
        (static_cast<std::uint64_t>(agent_index) << 32) | repetition_index;
    return splitmix64(master_seed ^ splitmix64(packed));
}

// Derives an auxiliary stream (per-step Monte Carlo scoring, environment
// instance draws, source/target selection) from an existing seed.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return splitmix64(seed ^ splitmix64(tag));
}

// Uniform draw on the open interval (0,1); never returns an exact endpoint,
// so it is safe to feed through an inverse CDF.
inline double uniform_unit(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace mmb
