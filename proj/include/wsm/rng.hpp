#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wsm {

/// SplitMix64 finalizer; used to derive independent per-sequence seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// Random stream for one sequence. The stream depends only on (seed, index),
/// so sequences can be generated in any order with identical output.
///
/// The variate transforms are written out instead of using <random>
/// distributions, whose algorithms are implementation-defined.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t index)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL))) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11U) + 0.5) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Exponential with the given rate.
    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

} // namespace wsm
