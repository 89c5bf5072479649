#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace detkit {

// Seedable 64-bit generator. Uniform/normal draws are derived directly from
// the raw engine output so a given seed replays the same stream everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1) with 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // integer in [0, n)
    int below(int n) {
        const int v = static_cast<int>(uniform01() * n);
        return v >= n ? n - 1 : v;
    }

    // standard normal via Box-Muller (pair computed, second half discarded,
    // which keeps the draw count per call fixed)
    double normal() {
        double u1 = uniform01();
        const double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Per-item stream seed: hash(master, index). Lets parallel per-image work
    // reproduce the serial run.
    static std::uint64_t split(std::uint64_t master, std::uint64_t index) {
        std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace detkit
