#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ruinlab {

using Engine = std::mt19937_64;

// Counter-style generator used for short, independently addressable
// substreams (one per simulated period).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Deterministic seed for substream `index` of `master`. Used for
// per-path, per-bootstrap-replicate and per-segment streams so results do
// not depend on how work is scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

Engine make_engine(std::uint64_t seed);

// Uniform on the open interval (0, 1), 53 bits.
template <class Gen>
double uniform01(Gen& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Exponential with the given rate, by inversion.
template <class Gen>
double exponential(Gen& gen, double rate) {
    return -std::log(uniform01(gen)) / rate;
}

} // namespace ruinlab
