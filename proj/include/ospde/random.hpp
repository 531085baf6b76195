#pragma once

#include <cstdint>
#include <random>

namespace ospde {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream tags keep the samplers of different objects apart.
enum class StreamTag : std::uint64_t {
    backward_noise = 0x42,
    forward_path = 0x57,
    probes = 0x50,
    property = 0x4c,
};

/// Independent generator for (seed, tag, index). Depends on nothing else, so a
/// given path or probe is reproduced regardless of how work is scheduled.
inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

}  // namespace ospde
