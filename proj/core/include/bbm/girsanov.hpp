#pragma once

#include <cstdint>
#include <functional>

#include "bbm/estimate.hpp"
#include "bbm/model.hpp"
#include "bbm/path.hpp"
#include "bbm/rng.hpp"

namespace bbm {

/// The Bessel <-> Brownian change-of-measure weight for one scalar path:
///   log w = alpha log(W_T / W_0) + ((alpha - alpha^2)/2) * integral W_u^-2 du
/// on paths that stay positive at every grid point, and -inf otherwise.
/// The integral is the trapezoid value on the grid.
struct PathWeight {
    double log_weight = 0.0;
    bool positive_throughout = true;
    double integral_term = 0.0;
    /// Set when the path dips below 0.01 * W_0; the quadrature of W^-2 is
    /// unreliable there. Such paths are retained, not discarded.
    bool near_zero_flag = false;
};

/// Requires a scalar path with W_0 > 0.
PathWeight girsanov_log_weight(const PathGrid& path, const ModelParams& params);

/// Importance-sampling estimate of a Bessel-law expectation E_x0[f] by
/// averaging exp(log w) * f over Brownian paths from x0 on a uniform grid.
/// An effective sample size below 10 adds a degeneracy warning; the fraction
/// of near-zero-flagged paths is reported as a warning when nonzero.
TailEstimate bessel_expectation(const std::function<double(const PathGrid&)>& f, double x0,
                                double T, const ModelParams& params, double grid_step,
                                std::int64_t n, std::uint64_t seed, int workers = 0);

}  // namespace bbm
