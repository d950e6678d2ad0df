#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Deterministic random-number utilities. Gaussian deviates are produced by an
// explicit Box–Muller transform on the raw 64-bit stream instead of
// std::normal_distribution, whose output sequence is not specified by the
// standard and differs across standard libraries; results here are
// reproducible for a given seed on any platform.

namespace cvtomo {

// splitmix64 — used to derive well-separated per-stream seeds from
// (base seed, stream index) pairs.
inline std::uint64_t splitmix64(std::uint64_t state) {
    std::uint64_t z = state + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
    return splitmix64(base_seed ^ splitmix64(stream_index));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box–Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cvtomo
