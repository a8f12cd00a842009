#ifndef TKSMOOTH_RNG_HPP
#define TKSMOOTH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tks {

/// SplitMix64 generator (Steele, Lea & Flood's splittable PRNG; the public
/// domain reference increments by the golden-gamma constant and applies a
/// 64-bit finalizer). Chosen over std::mt19937 because the standard
/// distributions are not bit-reproducible across library implementations,
/// and Monte Carlo substreams need to be derived cheaply from a run index.
///
/// Substreams: `substream(seed, key)` hashes seed and key independently
/// through the finalizer, so distinct (seed, run) pairs give statistically
/// independent streams without coordination between workers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

    static Rng substream(std::uint64_t seed, std::uint64_t key) {
        Rng r(0);
        r.state_ = mix(mix(seed) ^ (mix(key + 0x9e3779b97f4a7c15ULL) | 1ULL));
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Box-Muller; the second deviate of each pair is cached.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return mean + stddev * radius * std::cos(angle);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace tks

#endif
