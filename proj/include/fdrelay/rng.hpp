#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>

namespace fdrelay {

/// Finalizer step of splitmix64; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives the seed of an independent RNG stream from a master seed and a
/// path of identifiers (cell id, trial index, redraw attempt, ...).
/// The result depends only on (master, path), never on execution order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t id : path) h = mix64(h ^ id);
    return h;
}

/// Stable 64-bit key for a double, for use in seed paths.
inline std::uint64_t seed_key(double v) {
    std::uint64_t k = 0;
    std::memcpy(&k, &v, sizeof k);
    return k;
}

/// Seeded random stream. Gaussian variates are produced from explicit
/// uniform bits (not std::normal_distribution) so that a given seed yields
/// the same sequence on every standard library implementation.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(eng_() >> 63); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is < 2^-53 for the small n used here
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    /// Standard real Gaussian N(0, 1) via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double a = 2.0 * pi_ * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> cgaussian(double variance) {
        if (variance <= 0.0) return {0.0, 0.0};
        const double r = std::sqrt(-variance * std::log(uniform_pos()));
        const double a = 2.0 * pi_ * uniform();
        return {r * std::cos(a), r * std::sin(a)};
    }

  private:
    double uniform_pos() {  // (0, 1]; keeps log() finite
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    static constexpr double pi_ = 3.141592653589793238462643383279502884;
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fdrelay
