#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace tiger {

using Rng = std::mt19937_64;

/// Derives an independent child seed from a root seed and a purpose tag, so
/// every subsystem draws from its own stream while a single --seed controls all.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (h | 1ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    return derive_seed(derive_seed(root, tag), "#" + std::to_string(index));
}

/// Round half up for non-negative quantities: 0.5 -> 1, 1.5 -> 2.
inline std::size_t round_half_up(double x) {
    return x <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace tiger
