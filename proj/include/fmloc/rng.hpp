#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fmloc {

/// Counter-based generator: value i of stream (seed, stream) is
/// splitmix64(key + i * golden) with key = splitmix64(seed ^ splitmix64(stream)).
/// Pure integer arithmetic, so every platform produces the same stream;
/// normals use Box-Muller on consecutive uniform pairs.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + kGolden)))
    {
    }

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + counter * kGolden); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const
    {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw number `counter`.
    double normal(std::uint64_t counter) const
    {
        const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
};

} // namespace fmloc
