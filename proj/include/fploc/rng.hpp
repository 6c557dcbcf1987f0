#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fploc::rng {

// SplitMix64 finalizer; used to derive independent stream seeds from a
// master seed plus indices (trial, sweep, point, ...).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream-derivation domains. Keeping these distinct guarantees that e.g.
// database construction and runtime trials never share a generator state.
enum class Domain : std::uint64_t {
    grid = 1,
    database = 2,
    trial_target = 3,
    trial_runtime = 4,
    exponent = 5,
    placement = 6,
    generic = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, Domain domain,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ static_cast<std::uint64_t>(domain));
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return s;
}

// A self-contained random stream. The raw engine is std::mt19937_64 (fully
// specified by the standard); the variate transforms are fixed here rather
// than taken from std:: distributions so that sampled values are identical
// across standard library implementations.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Exponential with mean 1.
    double exponential() { return -std::log1p(-uniform01()); }

    // Index drawn from a pmf given as cumulative sums (last entry ~1).
    int categorical(const std::vector<double>& cdf) {
        const double u = uniform01();
        for (std::size_t i = 0; i + 1 < cdf.size(); ++i) {
            if (u < cdf[i]) return static_cast<int>(i);
        }
        return static_cast<int>(cdf.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

inline std::vector<double> cumulative(const std::vector<double>& probs) {
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    return cdf;
}

}  // namespace fploc::rng
