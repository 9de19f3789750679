#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "bbm/estimate.hpp"
#include "bbm/model.hpp"
#include "bbm/path.hpp"
#include "bbm/rng.hpp"

namespace bbm {

/// A barrier event on a time interval: the path must stay at or below
/// `upper` and at or above `lower` wherever those are present. Ties count as
/// satisfying the event (non-strict inequalities).
struct BarrierSpec {
    double s_begin = 0.0;
    double s_end = 0.0;
    std::optional<std::function<double(double)>> upper;
    std::optional<std::function<double(double)>> lower;
};

/// Parameter bundle for the barrier functions B, B0 and Q. The constants
/// default to the smallest values compatible with their roles; both are
/// configurable upward.
struct BarrierParams {
    double t = 0.0;
    double L = 1.0;
    double ell = 1.0;  // in [1, L^(1/6)]
    double z = 1.0;    // in [L^(1/6), L^(2/3)]
    double y = 0.0;
    double C_d = 8.0;
    double K_d = 8.0;
    /// Degenerate-constraint switches for good-particle counting: drop the
    /// track barriers (upper/lower to +-inf) or the endpoint window/floor.
    bool disable_track_constraints = false;
    bool disable_endpoint_constraints = false;

    static BarrierParams with_defaults(const ModelParams& params, double t, double L, double ell,
                                       double z, double y);

    double t_tilde() const { return t - L; }
    double ell_1() const { return std::pow(ell, 0.25); }
};

double default_C_d(const ModelParams& params);
double default_K_d(const ModelParams& params);

/// log applied to the clamped value max(x, 1); 0 whenever x <= 1.
inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

/// Affine interpolation between (0, a) and (T, b); s must lie in [0, T].
double linear_barrier(double a, double b, double T, double s);

/// Probability that a Brownian bridge from x to y over [0, T] stays below
/// the line from a to b: 1 - exp(-2 (a-x)(b-y) / T). Requires a >= x, b >= y.
double ballot_probability(double x, double y, double a, double b, double T);

/// Upper barrier (m_t/t) s + C_d log_+(s ^ (t-s)) + log L on s in [L, t].
double barrier_B(double s, const ModelParams& params, const BarrierParams& bp);

/// Upper barrier (m_t/t)(s+L) + y + log ell + K_d log_+(s ^ (t-L-ell-s)) on
/// s in [0, t-L-ell].
double barrier_B0(double s, const ModelParams& params, const BarrierParams& bp);

/// The three-piece lower barrier: constant sqrt(2)L - 2L^(2/3) on [0, ell_1],
/// the tilted line minus (s ^ (T0-s))^(2/3) in the middle, and constant
/// coord_y(2 ell^(2/3)) on the last ell_1-length piece (T0 = t-L-ell).
double barrier_Q(double s, const ModelParams& params, const BarrierParams& bp);

/// Grid-discretized barrier check: every stored point of `path` inside the
/// interval must satisfy the constraints. The path grid must cover the
/// interval. No excursion correction between grid points.
bool check_barrier_event(const PathGrid& path, const BarrierSpec& spec);

/// Bridge Monte Carlo estimate of P(lower-event | upper-event) for bridges
/// from x to y over [0, T], barriers checked on the uniform grid. Throws if
/// no sample satisfies the conditioning event.
TailEstimate mc_conditional_barrier(double x, double y, double T,
                                    const std::function<double(double)>& lower,
                                    const std::function<double(double)>& upper, std::int64_t n,
                                    double grid_step, RngStream& rng);

}  // namespace bbm
