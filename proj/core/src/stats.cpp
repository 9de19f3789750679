#include "bbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbm/parallel.hpp"

namespace bbm {

double batch_means_stderr(const std::vector<double>& xs, int batches) {
    if (batches < 2 || xs.size() < static_cast<std::size_t>(2 * batches))
        throw std::invalid_argument("batch_means_stderr: too few samples");
    const std::size_t per = xs.size() / static_cast<std::size_t>(batches);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        double m = 0.0;
        for (std::size_t i = 0; i < per; ++i) m += xs[static_cast<std::size_t>(b) * per + i];
        means.push_back(m / static_cast<double>(per));
    }
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    return std::sqrt(ss / (batches - 1.0) / static_cast<double>(batches));
}

std::vector<TailEstimate> estimate_centered_max_cdf(std::span<const double> samples,
                                                    std::span<const double> y_grid,
                                                    std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("estimate_centered_max_cdf: empty sample");
    std::vector<TailEstimate> out;
    out.reserve(y_grid.size());
    for (double y : y_grid) {
        std::int64_t hits = 0;
        for (double s : samples) hits += s <= y ? 1 : 0;
        out.push_back(TailEstimate::binomial(hits, static_cast<std::int64_t>(samples.size()), seed));
    }
    return out;
}

std::vector<TailEstimate> estimate_centered_max_tail(std::span<const double> samples,
                                                     std::span<const double> y_grid,
                                                     std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("estimate_centered_max_tail: empty sample");
    std::vector<TailEstimate> out;
    out.reserve(y_grid.size());
    for (double y : y_grid) {
        std::int64_t hits = 0;
        for (double s : samples) hits += s >= y ? 1 : 0;
        out.push_back(TailEstimate::binomial(hits, static_cast<std::int64_t>(samples.size()), seed));
    }
    return out;
}

std::vector<MalleinRatio> mallein_ratio(std::span<const double> y_grid,
                                        std::span<const TailEstimate> tail, double t) {
    if (y_grid.size() != tail.size())
        throw std::invalid_argument("mallein_ratio: grid/estimate size mismatch");
    std::vector<MalleinRatio> out;
    out.reserve(y_grid.size());
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        const double y = y_grid[i];
        if (y < 1.0 || y > std::sqrt(t))
            throw std::domain_error("mallein_ratio: y outside [1, sqrt(t)]");
        const double shape = y * std::exp(-kSqrt2 * y);
        MalleinRatio r;
        r.y = y;
        if (tail[i].value > 0.0) {
            r.ratio = tail[i].value / shape;
            r.upper = (tail[i].value + 3.0 * tail[i].stderr_) / shape;
        } else {
            r.censored = true;
            // binomial upper confidence bound at zero hits: ~3/n
            r.upper = 3.0 / static_cast<double>(std::max<std::int64_t>(tail[i].n, 1)) / shape;
        }
        out.push_back(r);
    }
    return out;
}

RateFit fit_tail_rate(std::span<const double> y_grid, std::span<const TailEstimate> tail,
                      bool remove_prefactor) {
    if (y_grid.size() != tail.size())
        throw std::invalid_argument("fit_tail_rate: grid/estimate size mismatch");
    std::vector<double> ys, logs;
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        if (tail[i].value <= 0.0) continue;
        ys.push_back(y_grid[i]);
        const double resp = remove_prefactor ? tail[i].value / y_grid[i] : tail[i].value;
        logs.push_back(std::log(resp));
    }
    if (ys.size() < 4) throw std::invalid_argument("fit_tail_rate: fewer than 4 positive points");
    const double n = static_cast<double>(ys.size());
    double sy = 0.0, sl = 0.0, syy = 0.0, syl = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        sy += ys[i];
        sl += logs[i];
        syy += ys[i] * ys[i];
        syl += ys[i] * logs[i];
    }
    const double denom = n * syy - sy * sy;
    if (denom <= 0.0) throw std::invalid_argument("fit_tail_rate: degenerate grid");
    RateFit fit;
    fit.slope = (n * syl - sy * sl) / denom;
    fit.intercept = (sl - fit.slope * sy) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double r = logs[i] - (fit.intercept + fit.slope * ys[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    fit.y_grid = std::move(ys);
    return fit;
}

std::vector<RightTailPoint> right_tail_normalized(double L, std::span<const double> z_grid,
                                                  double y, const ModelParams& params,
                                                  std::span<const TailEstimate> estimates,
                                                  NormalizerVariant variant) {
    if (z_grid.size() != estimates.size())
        throw std::invalid_argument("right_tail_normalized: grid/estimate size mismatch");
    const double z_lo = std::pow(L, 1.0 / 6.0), z_hi = std::pow(L, 2.0 / 3.0);
    std::vector<RightTailPoint> out;
    out.reserve(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        const double z = z_grid[i];
        if (z < z_lo || z > z_hi)
            throw std::domain_error("right_tail_normalized: z outside [L^(1/6), L^(2/3)]");
        const double norm = tail_normalizer(L, z, y, params, variant).value;
        RightTailPoint p;
        p.z = z;
        if (estimates[i].value > 0.0) {
            p.gamma_hat = estimates[i].value / norm;
            p.upper = (estimates[i].value + 3.0 * estimates[i].stderr_) / norm;
        } else {
            p.censored = true;
            p.upper = 3.0 / static_cast<double>(std::max<std::int64_t>(estimates[i].n, 1)) / norm;
        }
        out.push_back(p);
    }
    return out;
}

std::pair<TailEstimate, TailEstimate> coupling_tail_compare(double x0, double ell, double m_target,
                                                            std::int64_t n,
                                                            const ModelParams& params,
                                                            std::uint64_t seed, int workers) {
    if (!(x0 > 0.0)) throw std::invalid_argument("coupling_tail_compare: x0 must be > 0");
    std::vector<double> origin(static_cast<std::size_t>(params.d), 0.0);
    origin[0] = x0;
    std::vector<unsigned char> bessel_hit(static_cast<std::size_t>(n), 0);
    std::vector<unsigned char> oned_hit(static_cast<std::size_t>(n), 0);
    const double shifted = m_target - x0;  // the 1-d side is shift invariant

    parallel_replicates(n, workers, [&](std::int64_t i) {
        RngStream bessel_stream(seed, derive_stream_id(0x62657373ull, static_cast<std::uint64_t>(i)));
        const auto rmax = sample_max_modulus(params, origin, ell, PruneRule{}, 0.0, bessel_stream);
        bessel_hit[static_cast<std::size_t>(i)] = rmax && *rmax > m_target ? 1 : 0;
        RngStream oned_stream(seed, derive_stream_id(0x6f6e6564ull, static_cast<std::uint64_t>(i)));
        const auto wmax =
            sample_max_1d(params.branching_rate, 0.0, ell, PruneRule{}, 0.0, oned_stream);
        oned_hit[static_cast<std::size_t>(i)] = wmax && *wmax > shifted ? 1 : 0;
    });

    std::int64_t bh = 0, oh = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        bh += bessel_hit[static_cast<std::size_t>(i)];
        oh += oned_hit[static_cast<std::size_t>(i)];
    }
    return {TailEstimate::binomial(bh, n, seed), TailEstimate::binomial(oh, n, seed)};
}

BramsonTable bramson_tail_bound_check(std::span<const double> ell_grid,
                                      std::span<const double> w_grid, std::int64_t n,
                                      double median_offset_K, const PruneRule& prune,
                                      std::uint64_t seed, int workers) {
    constexpr double kLogCoef = 3.0 / (2.0 * kSqrt2);
    BramsonTable table;
    for (double ell : ell_grid) {
        if (ell < 8.0) throw std::domain_error("bramson_tail_bound_check: ell must be >= 8");
        const double w_floor = median_offset_K + 1.0 - kLogCoef * std::log(ell);
        for (double w : w_grid)
            if (w < w_floor)
                throw std::domain_error("bramson_tail_bound_check: w below the admissible floor");

        std::vector<double> maxima(static_cast<std::size_t>(n),
                                   -std::numeric_limits<double>::infinity());
        parallel_replicates(n, workers, [&](std::int64_t i) {
            RngStream stream(seed, derive_stream_id(0x6272616dull ^ static_cast<std::uint64_t>(
                                                                        ell * 1024.0),
                                                    static_cast<std::uint64_t>(i)));
            const auto wmax = sample_max_1d(1.0, 0.0, ell, prune, 0.25, stream);
            if (wmax) maxima[static_cast<std::size_t>(i)] = *wmax;
        });

        for (double w : w_grid) {
            const double level = kSqrt2 * ell + w;
            std::int64_t hits = 0;
            for (double m : maxima) hits += m > level ? 1 : 0;
            const auto est = TailEstimate::binomial(hits, n, seed);
            BramsonCell cell;
            cell.ell = ell;
            cell.w = w;
            cell.empirical = est.value;
            cell.stderr_ = est.stderr_;
            cell.bound_shape = std::pow(ell, -1.5) * (w + kLogCoef * std::log(ell)) *
                               std::exp(-w * kSqrt2) * std::exp(-w * w / (2.0 * ell));
            cell.censored = hits == 0;
            table.cells.push_back(cell);
        }
    }
    table.fitted_C = 0.0;
    bool any_censored = false;
    for (const auto& c : table.cells) {
        if (c.censored) {
            any_censored = true;
            continue;
        }
        table.fitted_C = std::max(table.fitted_C, c.empirical / c.bound_shape);
    }
    table.all_cells_covered = !any_censored;
    return table;
}

double sample_linear_exp_tail(RngStream& rng) {
    // Survival S(y) = y exp(-sqrt(2)(y - 1)) for y >= 1; solve S(y) = u.
    const double u = rng.next_open01();
    double lo = 1.0, hi = 2.0;
    auto g = [&](double v) { return std::log(v) - kSqrt2 * (v - 1.0) - std::log(u); };
    while (g(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

GumbelFit fit_gumbel_descriptive(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("fit_gumbel_descriptive: too few samples");
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (static_cast<double>(samples.size()) - 1.0));
    GumbelFit fit;
    fit.scale = sd * std::sqrt(6.0) / 3.14159265358979323846;
    fit.location = mean - 0.57721566490153286 * fit.scale;
    return fit;
}

}  // namespace bbm
