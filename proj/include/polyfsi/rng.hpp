#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "polyfsi/util.hpp"

namespace polyfsi {

/// Deterministic RNG with portable output streams.
///
/// std::mt19937_64 is bit-specified by the standard; the std distributions are
/// not, so uniform/normal draws are generated here by fixed formulas to keep
/// runs bit-identical across standard libraries.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (always consumes exactly two draws).
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1 - 1e-12));
    }

   private:
    std::mt19937_64 eng_;
};

}  // namespace polyfsi
