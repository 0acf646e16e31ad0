#pragma once

#include <cstdint>
#include <limits>

namespace silpose {

/// What a random stream is used for; keeps streams for the same
/// (seed, iteration, index) independent.
enum class StreamPurpose : std::uint64_t {
    init = 1,
    resample = 2,
    motion = 3,
    foreground_noise = 4,
    background_noise = 5,
};

/// SplitMix64 generator. Small enough to create one per particle per
/// iteration, so random draws never depend on the worker count.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t seed) : state_(seed) {}

    /// Stream keyed by (seed, purpose, iteration, index).
    StreamRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t iteration, std::uint64_t index)
        : state_(mix(mix(mix(seed ^ mix(static_cast<std::uint64_t>(purpose))) + iteration) + index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace silpose
