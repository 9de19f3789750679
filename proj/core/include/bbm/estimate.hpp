#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bbm {

/// A Monte Carlo point estimate with provenance. For indicator functionals
/// stderr is the binomial formula; otherwise the sample standard error.
struct TailEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::vector<std::string> warnings;

    static TailEstimate binomial(std::int64_t hits, std::int64_t n, std::uint64_t seed) {
        TailEstimate e;
        e.n = n;
        e.seed = seed;
        e.value = n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
        e.stderr_ = n > 0 ? std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n)) : 0.0;
        return e;
    }

    static TailEstimate from_samples(const std::vector<double>& xs, std::uint64_t seed) {
        TailEstimate e;
        e.n = static_cast<std::int64_t>(xs.size());
        e.seed = seed;
        if (xs.empty()) return e;
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        e.value = mean;
        e.stderr_ = xs.size() > 1
                        ? std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                                    static_cast<double>(xs.size()))
                        : 0.0;
        return e;
    }
};

/// Standard error of the mean via non-overlapping batch means; a sanity
/// cross-check against the iid formula.
double batch_means_stderr(const std::vector<double>& xs, int batches = 32);

}  // namespace bbm
