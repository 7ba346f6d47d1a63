#include "rpoa/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rpoa {

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate)
{
    if (!(rate > 0.0))
        return std::numeric_limits<double>::infinity();
    return -std::log(uniform_open_low()) / rate;
}

double Rng::normal()
{
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean)
{
    if (!(mean > 0.0))
        return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform_open_low();
    while (p > limit) {
        ++k;
        p *= uniform_open_low();
    }
    return k;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace rpoa
