#pragma once

#include <cstdint>

namespace oneshot {

// SplitMix64 generator. We deliberately avoid <random> distributions: their
// output is implementation-defined, and generated scenes must be byte-identical
// across standard libraries and platforms. All derived draws below use only
// integer arithmetic and exactly-rounded IEEE double ops.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Lemire multiply-shift reduction; the modulo
    // bias is below n * 2^-64, irrelevant at the scales used here.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via the Irwin-Hall sum of 12 uniforms. Tails truncate at
    // +/-6 sigma, which is fine for image noise, and the result is reproducible
    // bit-for-bit because no libm calls are involved.
    double gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform01();
        return s - 6.0;
    }

private:
    std::uint64_t state_;
};

}  // namespace oneshot
