#pragma once

#include <cstdint>
#include <random>

namespace evnet {

// Stateless seed mixer used to derive independent stream seeds from a run
// seed plus structural tags (replication, station, customer sequence).
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(base ^ 0x8f1bbcdcbfa53e0bULL);
    s = mix_seed(s ^ a);
    s = mix_seed(s ^ b);
    return mix_seed(s ^ c);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
    return Rng(derive_seed(base, a, b, c));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double exponential(Rng& rng, double rate) {
    return std::exponential_distribution<double>(rate)(rng);
}

} // namespace evnet
