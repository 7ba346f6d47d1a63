#pragma once

#include <cstdint>
#include <random>

namespace rpoa {

/// Seeded generator with platform-independent draws. std::mt19937_64 output is
/// fixed by the standard; the distributions here are written out so results do
/// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Exponential with the given rate; +inf for rate 0.
    double exponential(double rate);
    /// Standard normal via Box-Muller (one value per call).
    double normal();
    /// Poisson by inversion; intended for small means.
    std::uint64_t poisson(double mean);
    /// Index drawn with probability proportional to weights[i].
    template <typename Range>
    std::size_t categorical(const Range& weights, double total);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent sub-seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

template <typename Range>
std::size_t Rng::categorical(const Range& weights, double total)
{
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    std::size_t i = 0;
    for (double w : weights) {
        if (w > 0.0) {
            acc += w;
            last_positive = i;
            if (target < acc)
                return i;
        }
        ++i;
    }
    return last_positive;
}

} // namespace rpoa
