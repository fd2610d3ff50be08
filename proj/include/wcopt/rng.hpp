#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "wcopt/vec.hpp"

namespace wcopt {

// Seeded generator with hand-rolled distributions so that runs replay
// bit-identically regardless of the standard library in use. Every solver
// owns exactly one Rng; nothing is drawn from shared state.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1) with 53 bits of mantissa
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // index in {0, ..., n-1}; n must be >= 1
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // standard normal via Box-Muller (cos branch only, no cached spare,
    // so the draw count per call is fixed and replay stays exact)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector normal_vector(std::size_t d) {
        Vector v(d);
        for (auto& x : v) x = normal();
        return v;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace wcopt
