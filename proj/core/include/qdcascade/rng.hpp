#pragma once

#include <cstdint>
#include <random>

namespace qdcascade {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent engine for (seed, stream, chunk). Results depend only on
/// these three numbers, never on which thread draws from the engine.
inline Engine substream(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t chunk) noexcept {
    std::uint64_t const key =
        splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x632BE59BD9B4E019ull) ^
                   (chunk * 0xD1342543DE82EF95ull));
    std::seed_seq seq{static_cast<std::uint32_t>(key),
                      static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(chunk)};
    return Engine(seq);
}

// Stream identifiers for the simulation stages.
namespace streams {
inline constexpr std::uint64_t emission = 1;
inline constexpr std::uint64_t detection = 2;
inline constexpr std::uint64_t background = 3;
inline constexpr std::uint64_t sync = 4;
inline constexpr std::uint64_t hbt = 5;
inline constexpr std::uint64_t hom = 6;
inline constexpr std::uint64_t michelson = 7;
inline constexpr std::uint64_t coherent = 8;
inline constexpr std::uint64_t hom_ports = 9;
} // namespace streams

} // namespace qdcascade
