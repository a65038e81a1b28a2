#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace prunelab {

// Seed derivation used everywhere a sub-stream is needed. The scheme is part
// of the artifact's reproducibility contract and must not change between
// versions:
//
//   splitmix64(x): the standard finalizer (Steele et al. constants)
//   fnv1a64(s):    FNV-1a over the bytes of s
//   mix_seed(h, parts...): h' = splitmix64(h ^ part) folded left to right
//
// Trial seeds are mix_seed(master, axis_value, fnv1a64(arch_name), seed_index);
// dataset seeds are mix_seed(master, axis_value, seed_index, fnv1a64("data")).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t h, std::initializer_list<std::uint64_t> parts) {
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

template <typename... Parts>
std::uint64_t mix_seed(std::uint64_t h, Parts... parts) {
    return mix_seed(h, {static_cast<std::uint64_t>(parts)...});
}

/// Shortest round-trip decimal form, for reproducible text outputs.
std::string format_double(double value);

}  // namespace prunelab
