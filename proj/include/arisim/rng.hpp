#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace arisim {

/// Deterministic random stream. The engine is std::mt19937_64 (fully
/// specified by the standard); all value mappings are implemented here so
/// that a given seed produces the same sequence on every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Stream-splitting rule for experiment runs: the engine seed is
    /// splitmix64(splitmix64(seed) ^ fnv1a64(arm)). Documented in the README;
    /// runs with different (seed, arm) pairs get independent streams.
    static Rng for_run(uint64_t seed, std::string_view arm) {
        return Rng(splitmix64(splitmix64(seed) ^ fnv1a64(arm)));
    }

    static uint64_t splitmix64(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static uint64_t fnv1a64(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // rejection sampling keeps the draw unbiased for any n
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; one pair of uniforms per pair of
    /// normals, the second value is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circular complex Gaussian CN(0, variance).
    std::complex<double> cgaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

    Eigen::VectorXcd cgaussian_vector(Eigen::Index n, double variance) {
        Eigen::VectorXcd out(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out[i] = cgaussian(variance);
        return out;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace arisim
