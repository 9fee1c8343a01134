#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace mdpreg {

/// Deterministic random stream with a documented algorithm identity so that
/// ports can reproduce it from the name and seed alone.
///
/// Engine: SplitMix64 (Steele, Lea & Flood 2014), the standard constants:
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)
/// Substreams: derive(seed, index) seeds a fresh engine with one SplitMix64
/// step of (seed XOR (index + 1) * 0x9E3779B97F4A7C15).
/// uniform():  (next() >> 11) * 2^-53, in [0, 1).
/// normal():   Box-Muller on (1 - uniform(), uniform()); pairs are generated
///             together and the second member is cached.
/// categorical(): inverse-CDF linear scan over the probability row.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Seed of substream `index` of `seed`.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mixer(seed ^ ((index + 1) * kGolden));
        return mixer.next();
    }

    /// Engine seeded for substream `index` of `seed`.
    static SplitMix64 derive(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(derive_seed(seed, index));
    }

    std::uint64_t next() {
        state_ += kGolden;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    /// Index drawn from the distribution given by `probs` (a probability
    /// row). Returns the last positive-probability index if accumulated
    /// rounding leaves the draw above the final partial sum.
    int categorical(const Eigen::Ref<const Eigen::RowVectorXd>& probs) {
        const double u = uniform();
        double cdf = 0.0;
        int last_positive = 0;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            const double p = probs[i];
            if (p > 0.0) {
                last_positive = static_cast<int>(i);
                cdf += p;
                if (u < cdf) return static_cast<int>(i);
            }
        }
        return last_positive;
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mdpreg
