#include "bbm/girsanov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbm/kernels.hpp"
#include "bbm/parallel.hpp"

namespace bbm {

PathWeight girsanov_log_weight(const PathGrid& path, const ModelParams& params) {
    if (path.dim != 1) throw std::invalid_argument("girsanov_log_weight: path must be scalar");
    if (path.times.empty()) throw std::invalid_argument("girsanov_log_weight: empty path");
    const double w0 = path.values.front();
    if (!(w0 > 0.0)) throw std::domain_error("girsanov_log_weight: W_0 must be > 0");

    PathWeight out;
    double integral = 0.0;
    double prev_inv2 = 1.0 / (w0 * w0);
    double min_val = w0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double w = path.values[i];
        min_val = std::min(min_val, w);
        if (!(w > 0.0)) {
            out.positive_throughout = false;
            break;
        }
        const double inv2 = 1.0 / (w * w);
        integral += 0.5 * (prev_inv2 + inv2) * (path.times[i] - path.times[i - 1]);
        prev_inv2 = inv2;
    }
    out.near_zero_flag = min_val < 0.01 * w0;
    if (!out.positive_throughout) {
        out.integral_term = std::numeric_limits<double>::infinity();
        out.log_weight = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.integral_term = integral;
    const double a = params.alpha();
    out.log_weight = a * std::log(path.values.back() / w0) + 0.5 * (a - a * a) * integral;
    return out;
}

TailEstimate bessel_expectation(const std::function<double(const PathGrid&)>& f, double x0,
                                double T, const ModelParams& params, double grid_step,
                                std::int64_t n, std::uint64_t seed, int workers) {
    if (!(x0 > 0.0)) throw std::invalid_argument("bessel_expectation: x0 must be > 0");
    if (n <= 0) throw std::invalid_argument("bessel_expectation: n must be > 0");
    const auto grid = uniform_grid(T, grid_step);

    std::vector<double> weighted(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    std::vector<unsigned char> flagged(static_cast<std::size_t>(n), 0);
    parallel_replicates(n, workers, [&](std::int64_t i) {
        RngStream rng(seed, derive_stream_id(0x6972736176ull, static_cast<std::uint64_t>(i)));
        const PathGrid path = sample_bm_path(x0, grid, rng);
        const PathWeight pw = girsanov_log_weight(path, params);
        const double w = pw.positive_throughout ? std::exp(pw.log_weight) : 0.0;
        weights[static_cast<std::size_t>(i)] = w;
        weighted[static_cast<std::size_t>(i)] = w > 0.0 ? w * f(path) : 0.0;
        flagged[static_cast<std::size_t>(i)] = pw.near_zero_flag ? 1 : 0;
    });

    auto est = TailEstimate::from_samples(weighted, seed);
    double sw = 0.0, sw2 = 0.0;
    std::int64_t n_flagged = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        sw += weights[i];
        sw2 += weights[i] * weights[i];
        n_flagged += flagged[i];
    }
    const double ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
    if (ess < 10.0) est.warnings.push_back("degenerate weights: effective sample size < 10");
    if (n_flagged > 0)
        est.warnings.push_back("near-zero paths: " + std::to_string(n_flagged) + " of " +
                               std::to_string(n));
    return est;
}

}  // namespace bbm
