#ifndef FRICTION_RNG_HPP
#define FRICTION_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace friction {

using Rng = std::mt19937_64;

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an independent per-problem stream. Results must not depend on
/// the order problems are scheduled in, so every source of randomness is
/// derived from (root seed, problem id, purpose tag) and nothing else.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view problem_id,
                                 std::string_view purpose) {
    std::uint64_t h = splitmix64(root ^ fnv1a64(problem_id));
    return splitmix64(h ^ fnv1a64(purpose));
}

inline Rng derive_rng(std::uint64_t root, std::string_view problem_id,
                      std::string_view purpose) {
    return Rng(derive_seed(root, problem_id, purpose));
}

}  // namespace friction

#endif
