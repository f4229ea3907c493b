#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace fairkm {

// std::uniform_int_distribution is implementation-defined, which would break
// byte-identical output across platforms; draw bounded integers by rejection
// on the fully specified mt19937_64 stream instead.
inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

/// First `count` elements of a uniformly random permutation of 0..population-1.
inline std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                           std::size_t count,
                                                           std::mt19937_64& rng) {
    std::vector<std::size_t> indices(population);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < count && i + 1 < population; ++i) {
        const std::size_t j = i + bounded_uniform(rng, population - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(count);
    return indices;
}

}  // namespace fairkm
