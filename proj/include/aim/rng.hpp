#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace aim {

// Deterministic random engine used by every stochastic component.
//
// xoshiro256** seeded through splitmix64. We keep our own engine (instead of
// std::mt19937 + std:: distributions) because the distribution helpers below
// are pinned to a fixed algorithm: results are bit-identical across
// platforms, standard library versions, and thread counts, which the
// reproducibility contract of the optimizer and the signal simulator relies
// on. The four-word state is trivially serializable into checkpoints.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    // Derives an independent stream, e.g. one per Monte-Carlo chunk.
    static Rng derived(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        x ^= 0x9e3779b97f4a7c15ULL + stream;
        return Rng(a ^ splitmix64(x));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // One standard normal pair (Box-Muller); no hidden cache state.
    std::pair<double, double> normal_pair() {
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    // Circular complex normal with unit total variance.
    std::complex<double> cnormal() {
        auto [a, b] = normal_pair();
        return {a * 0.70710678118654752440, b * 0.70710678118654752440};
    }

    std::array<std::uint64_t, 4>& state() { return s_; }
    const std::array<std::uint64_t, 4>& state() const { return s_; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::array<std::uint64_t, 4> s_{};
};

} // namespace aim
