#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace shapecx {

// Deterministic random source. Draws raw words from mt19937_64 and maps
// them to distributions by hand so that results do not depend on the
// standard library's (implementation-defined) distribution algorithms.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite
        double u1 = ((engine_() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n), n > 0. Multiply-shift, no modulo bias.
    int uniform_int(int n) {
        return static_cast<int>((static_cast<__uint128_t>(engine_()) *
                                 static_cast<__uint128_t>(n)) >> 64);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace shapecx
