#pragma once

#include <span>

#include "bbm/path.hpp"
#include "bbm/rng.hpp"

namespace bbm {

/// Brownian path started at x0 (scalar or d-vector), sampled at `grid_times`
/// (strictly increasing, first element 0). Increments over consecutive grid
/// intervals are exact Gaussians, variance = the time gap, per coordinate.
PathGrid sample_bm_path(std::span<const double> x0, std::span<const double> grid_times,
                        RngStream& rng);
PathGrid sample_bm_path(double x0, std::span<const double> grid_times, RngStream& rng);

/// Brownian bridge from x at time 0 to y at time T, sampled on a grid that
/// must span [0, T]; the endpoints are pinned exactly.
PathGrid sample_bridge(double x, double y, double T, std::span<const double> grid_times,
                       RngStream& rng);

/// Bessel path of dimension d from x0 >= 0, via the d-dimensional embedding:
/// the returned scalar track is the Euclidean norm of a d-dimensional
/// Brownian motion started at (x0, 0, ..., 0). Grid marginals are exact; no
/// SDE discretization is involved.
PathGrid sample_bessel_path(int d, double x0, std::span<const double> grid_times, RngStream& rng);

/// Density of the Bessel-process value at time L started from the origin,
/// i.e. of sqrt(L) * chi_d.
double bessel_density_from_origin(int d, double L, double r);

/// Brownian transition density p_s(x, y) and its log; s > 0.
double gaussian_density(double s, double x, double y);
double gaussian_log_density(double s, double x, double y);

/// Branching clock: exponential with the given rate.
double sample_branch_time(RngStream& rng, double rate = 1.0);

}  // namespace bbm
