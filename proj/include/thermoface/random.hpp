#pragma once

// Draws built straight from mt19937_64 bits. The standard distributions are
// implementation-defined, these give the same stream on every platform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace thermoface::detail {

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * unit_uniform(rng);
}

/// Integer in [0, n), n > 0.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

/// Standard normal by Box-Muller.
inline double gaussian(std::mt19937_64& rng)
{
    const double u = 1.0 - unit_uniform(rng); // (0, 1]
    const double v = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

/// Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng)
{
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
}

} // namespace thermoface::detail
