#include "ruinlab/rng.hpp"

namespace ruinlab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    SplitMix64 a(master);
    const std::uint64_t mixed_master = a();
    SplitMix64 b(mixed_master ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    return b();
}

Engine make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

} // namespace ruinlab
