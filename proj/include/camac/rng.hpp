#ifndef CAMAC_RNG_HPP
#define CAMAC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace camac {

// Deterministic random stream. All draws come from mt19937_64 raw output
// through hand-rolled distributions so results are bit-identical across
// platforms and standard-library versions. Every consumer derives a named
// child stream from one root seed, which keeps call sites independent of
// each other's draw counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : root_(seed), eng_(splitmix(seed)) {}

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is below 1e-18 for n < 2^32.
    int uniform_int(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Child stream keyed by label; independent of draws taken from *this.
    Rng derive(std::string_view label) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : label) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0x100000001b3ull;
        }
        return Rng(splitmix(root_ ^ h));
    }

    Rng derive(std::string_view label, std::uint64_t index) const {
        return derive(label).derive_index(index);
    }

    std::uint64_t raw() { return eng_(); }

private:
    Rng derive_index(std::uint64_t index) const { return Rng(splitmix(root_ * 0x9e3779b97f4a7c15ull + index)); }

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t root_;
    std::mt19937_64 eng_;
};

}  // namespace camac

#endif
