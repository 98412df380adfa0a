#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace efind {

/// Deterministic random source. All sampling goes through explicit helpers
/// instead of std distributions, whose algorithms are implementation-defined;
/// this keeps seeded runs reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return v < n ? v : n - 1;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// Samples indices proportionally to a fixed nonnegative weight vector
/// (cumulative table + binary search).
class DiscreteSampler {
public:
    explicit DiscreteSampler(std::span<const double> weights) {
        cdf_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("DiscreteSampler: negative weight");
            acc += w;
            cdf_.push_back(acc);
        }
        if (cdf_.empty() || acc <= 0.0)
            throw std::invalid_argument("DiscreteSampler: no positive weight");
        total_ = acc;
    }

    std::size_t sample(Rng& rng) const {
        double x = rng.uniform() * total_;
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] <= x) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

/// Mixes extra words into a seed (splitting one seed into independent streams).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + salt * 0xbf58476d1ce4e5b9ULL);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace efind
