#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace daor {

// All randomness in the project flows through the two generators below so
// that experiment outputs are bit-reproducible for a given seed.

/// One SplitMix64 step (Steele/Lea/Flood); advances `state` and returns the output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Per-trial seed mixing function, published so runs can be reproduced
/// externally: mix_seed(m, k) = SplitMix64 output for state m + k * 2^64/phi.
inline std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    std::uint64_t s = master_seed + 0x9E3779B97F4A7C15ull * trial_index;
    return splitmix64_next(s);
}

/// xoshiro256++ (Blackman & Vigna 2019), state seeded from a SplitMix64 stream.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64_next(s);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 mantissa bits: (next() >> 11) * 2^-53.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Two independent N(0,1) draws via the Marsaglia polar transform.
    /// The rejection loop consumes uniforms from the same stream, so the
    /// mapping seed -> samples is fixed.
    std::pair<double, double> gaussian_pair() {
        while (true) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            const double m = std::sqrt(-2.0 * std::log(s) / s);
            return {u * m, v * m};
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace daor
