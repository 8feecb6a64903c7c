#pragma once
#include <cstdint>
#include <cmath>

namespace vnfp {

/// splitmix64 output mixer; full 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based random stream keyed by (seed, stream index).
/// Every draw is a pure function of the key and a counter, so paths can be
/// scheduled on any number of threads and still see identical randomness.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : base_(mix64(seed ^ mix64(stream * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull)))
    {
    }

    /// Uniform draw in (0, 1), counter-addressable.
    double uniform(std::uint64_t counter) const
    {
        const std::uint64_t bits = mix64(base_ + counter * 0x9E3779B97F4A7C15ull);
        return double(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Box-Muller pair; consumes the two uniforms at counters 2c and 2c+1.
    void normal_pair(std::uint64_t c, double& z0, double& z1) const
    {
        const double u1 = uniform(2 * c);
        const double u2 = uniform(2 * c + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

private:
    std::uint64_t base_;
};

}  // namespace vnfp
