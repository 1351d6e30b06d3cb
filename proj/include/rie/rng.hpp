#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace rie {

// SplitMix64 step; used both as a mixer and to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, trial, role). Trials and
// roles (signal, noise, rotation, ...) get non-overlapping streams regardless
// of execution order, which keeps Monte-Carlo runs reproducible across
// thread counts.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                                 std::uint64_t role) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = master ^ (0x9e3779b97f4a7c15ULL * (trial + 1));
    std::uint64_t b = splitmix64(s);
    s = master ^ (0xc2b2ae3d27d4eb4fULL * (role + 1)) ^ trial;
    std::uint64_t c = splitmix64(s);
    return a ^ b ^ c;
}

// Seeded random stream. Gaussian variates come from a hand-rolled Box-Muller
// so that output is identical across standard library implementations
// (std::normal_distribution is not pinned by the standard).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace rie
