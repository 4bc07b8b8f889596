#pragma once

#include <cmath>
#include <cstdint>

namespace ozonecast {

// Deterministic splitmix64 generator. Self-contained so that seeded runs
// produce identical streams on every platform and compiler; std::
// distributions are implementation-defined and would break byte-identical
// reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) from the high 53 bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, one value per call (no cached spare, so streams derived
    // from the same seed stay reproducible regardless of call pattern).
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n). Modulo bias is negligible for the set
    // sizes used here (n << 2^64).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Derives an independent stream id, used to give each restart or
    // candidate its own generator so results do not depend on execution
    // order.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (stream * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

}  // namespace ozonecast
