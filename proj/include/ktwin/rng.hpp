#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ktwin {

// splitmix64: used to derive independent, well-mixed seeds for per-entity
// random streams from (master seed, entity name). Keeping one generator per
// entity makes runs reproducible even when unrelated config changes reorder
// the global draw sequence.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::mt19937_64 make_stream(uint64_t seed, std::string_view name) {
    return std::mt19937_64(splitmix64(seed ^ fnv1a64(name)));
}

}  // namespace ktwin
