#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "goldenphy/common.hpp"

namespace goldenphy {

// splitmix64 scramble, used to derive independent per-trial seeds from a
// master seed so that Monte Carlo results do not depend on how trials are
// scheduled across threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seeded generator with hand-rolled draw functions. The standard
// distributions are implementation-defined; spelling out the mappings keeps
// every simulation bit-reproducible for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t bound = n ? (~std::uint64_t{0} - ~std::uint64_t{0} % n) : 0;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r < bound) return r % n;
        }
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    cplx cgaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        return {s * gaussian(), s * gaussian()};
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace goldenphy
