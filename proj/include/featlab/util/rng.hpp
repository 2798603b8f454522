#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace featlab {

// splitmix64 finalizer; good avalanche for seed derivation
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a run seed and a stream tag.
// Every source of randomness in the project draws from a stream made here,
// so equal configs reproduce bit-identical runs.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return mix64(seed ^ mix64(h));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
    return std::mt19937_64(stream_seed(seed, stream));
}

}  // namespace featlab
