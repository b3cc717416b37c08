#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <random>

namespace sublinopt {

// Every randomized routine in the library draws through this wrapper.
// mt19937_64 has a fully specified output sequence, and we avoid the
// std::*_distribution adaptors (their algorithms are implementation
// defined), so a seed determines the exact run on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0,1) with 53 random bits; never returns 1.0.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n); rejection sampling on the top partial block.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;
        for (;;) {
            std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; the spare value is cached so draws
    // consume uniforms in a fixed pattern.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sublinopt
