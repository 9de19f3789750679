#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bbm/branching.hpp"
#include "bbm/estimate.hpp"
#include "bbm/model.hpp"
#include "bbm/rng.hpp"

namespace bbm {

/// Ordinary least squares on (y, log value) pairs with positive values.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::vector<double> y_grid;  // the grid points actually used
};

/// Empirical CDF of centered-maximum samples at each y, with binomial stderr.
std::vector<TailEstimate> estimate_centered_max_cdf(std::span<const double> samples,
                                                    std::span<const double> y_grid,
                                                    std::uint64_t seed);

/// Upper-tail counterpart P(sample >= y), evaluated on the same realizations
/// for every y so monotonicity in y holds per run, not just in expectation.
std::vector<TailEstimate> estimate_centered_max_tail(std::span<const double> samples,
                                                     std::span<const double> y_grid,
                                                     std::uint64_t seed);

struct MalleinRatio {
    double y = 0.0;
    double ratio = 0.0;    // estimate / (y exp(-sqrt(2) y))
    bool censored = false; // empirical tail was zero; `upper` bounds the ratio
    double upper = 0.0;
};

/// Ratios against the y exp(-sqrt(2) y) tail shape. Every y must lie in
/// [1, sqrt(t)].
std::vector<MalleinRatio> mallein_ratio(std::span<const double> y_grid,
                                        std::span<const TailEstimate> tail, double t);

/// Least-squares decay rate of the tail. With remove_prefactor the response
/// is log(P/y) (the slope then targets -sqrt(2)); otherwise log P. Needs at
/// least 4 positive grid points.
RateFit fit_tail_rate(std::span<const double> y_grid, std::span<const TailEstimate> tail,
                      bool remove_prefactor);

struct RightTailPoint {
    double z = 0.0;
    double gamma_hat = 0.0;  // estimate / tail normalizer
    bool censored = false;
    double upper = 0.0;
};

/// Normalizes window-start tail estimates by the tail normalizer; the
/// normalized values collapse to a single constant as L and t grow.
std::vector<RightTailPoint> right_tail_normalized(double L, std::span<const double> z_grid,
                                                  double y, const ModelParams& params,
                                                  std::span<const TailEstimate> estimates,
                                                  NormalizerVariant variant =
                                                      NormalizerVariant::radial_power);

/// Branching Bessel tail from a large start x0 vs the 1-d BBM tail for the
/// shifted level: P_x0(R*_ell > m_target) vs P(W*_ell > m_target - x0).
std::pair<TailEstimate, TailEstimate> coupling_tail_compare(double x0, double ell, double m_target,
                                                            std::int64_t n,
                                                            const ModelParams& params,
                                                            std::uint64_t seed, int workers = 0);

struct BramsonCell {
    double ell = 0.0;
    double w = 0.0;
    double empirical = 0.0;
    double stderr_ = 0.0;
    double bound_shape = 0.0;  // ell^(-3/2) (w + (3/(2 sqrt 2)) log ell) e^(-w sqrt 2) e^(-w^2/(2 ell))
    bool censored = false;
};

struct BramsonTable {
    std::vector<BramsonCell> cells;
    double fitted_C = 0.0;      // max empirical / bound_shape over uncensored cells
    bool all_cells_covered = false;  // no censored cells, so the fitted C covers the grid
};

/// Empirical 1-d BBM tail P(W*_ell > sqrt(2) ell + w) against the bound
/// shape, with the constant fitted as the worst ratio. Requires ell >= 8 and
/// w >= K + 1 - (3/(2 sqrt 2)) log ell for the configured median offset K.
/// An optional prune rule tames the population at large ell; its bias is the
/// caller's to measure.
BramsonTable bramson_tail_bound_check(std::span<const double> ell_grid,
                                      std::span<const double> w_grid, std::int64_t n,
                                      double median_offset_K, const PruneRule& prune,
                                      std::uint64_t seed, int workers = 0);

/// Inverse-CDF sampler for the law with survival function
/// min(1, e^(sqrt 2) y e^(-sqrt 2 y)) on [1, inf); the self-test target for
/// the tail-rate fitter.
double sample_linear_exp_tail(RngStream& rng);

/// Descriptive Gumbel location/scale by the method of moments. The limit law
/// is a Gumbel mixture, so this is reporting only, never a correctness gate.
struct GumbelFit {
    double location = 0.0;
    double scale = 1.0;
};
GumbelFit fit_gumbel_descriptive(std::span<const double> samples);

}  // namespace bbm
