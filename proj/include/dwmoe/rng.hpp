#pragma once

// Seedable, portable random number generation. Everything downstream that
// draws randomness (weight init, MCMC proposals, data generators) goes
// through Xoshiro256pp so results are bit-reproducible for a given seed,
// independent of the platform's <random> distributions.

#include <cmath>
#include <cstdint>

namespace dwmoe {

// SplitMix64, used for seeding and for deriving independent sub-seeds.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// Derive the k-th sub-seed of a base seed. Used to give repetitions,
// experts and candidate trainings independent, reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
    SplitMix64 sm(base + k * 0x9E3779B97F4A7C15ULL);
    return sm.next();
}

// xoshiro256++ (Blackman & Vigna). State is seeded via SplitMix64.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next()) * n) >> 64);
    }

    // Standard normal via Box-Muller. Two uniforms per draw, no cached
    // spare, so the consumed stream length is a pure function of the call
    // count.
    double normal() {
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace dwmoe
