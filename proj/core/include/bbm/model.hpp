#pragma once

#include <cmath>

#include "bbm/log_value.hpp"

namespace bbm {

inline constexpr double kSqrt2 = 1.4142135623730950488;

/// Model constants for d-dimensional binary BBM at branching rate 1.
/// alpha = (d-1)/2 and c_d = (d-4)/(2*sqrt(2)) are derived, never set.
struct ModelParams {
    int d = 2;
    double branching_rate = 1.0;

    explicit ModelParams(int dim = 2);

    double alpha() const { return 0.5 * (d - 1); }
    double c_d() const { return (d - 4) / (2.0 * kSqrt2); }
};

/// Centering sequence m_t = sqrt(2) t + c_d log t.
/// Throws for t <= 0; t in (0,1] is permitted (the log term goes negative),
/// which `centering_warns` reports.
double centering(const ModelParams& params, double t);
inline bool centering_warns(double t) { return t <= 1.0; }

/// m_t / t - sqrt(2) = c_d log(t) / t.
double offset_o_t(const ModelParams& params, double t);

/// Height coordinates measured against the front:
///   coord_x(L, a)            = sqrt(2) L - a
///   coord_y(params, t, ell, y, b) = (m_t/t)(t - ell) + y - b
double coord_x(double L, double a);
double coord_y(const ModelParams& params, double t, double ell, double y, double b);

/// The radial window at time L. Endpoint exponents default to (1/6, 2/3) and
/// are configurable; the window is the closed interval
/// [sqrt(2)L - L^outer_exp, sqrt(2)L - L^inner_exp].
struct WindowSpec {
    double L;
    double inner_exp = 1.0 / 6.0;
    double outer_exp = 2.0 / 3.0;

    double lo() const { return kSqrt2 * L - std::pow(L, outer_exp); }
    double hi() const { return kSqrt2 * L - std::pow(L, inner_exp); }
    bool contains(double r) const { return r >= lo() && r <= hi(); }
};

/// Closed-interval membership test for the default window.
bool in_window(double r, double L);

/// Which power carries the polynomial prefactor in the window statistics;
/// the two choices are interchangeable in the limit.
enum class NormalizerVariant { radial_power, sqrt2L_power };

/// The tail normalizer (sqrt(2)L - z)^(-alpha) z exp(-(z+y) sqrt(2)),
/// computed in log space; `value` saturates rather than overflowing.
struct TailNormalizer {
    double L = 0.0;
    double z = 0.0;
    double y = 0.0;
    double value = 0.0;
    LogValue log_value;
};

/// Requires sqrt(2) L > z > 0 (throws otherwise).
TailNormalizer tail_normalizer(double L, double z, double y, const ModelParams& params,
                               NormalizerVariant variant = NormalizerVariant::radial_power);

}  // namespace bbm
