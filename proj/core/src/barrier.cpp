#include "bbm/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bbm/kernels.hpp"

namespace bbm {

double default_C_d(const ModelParams& params) {
    return std::max({4.0 * params.d, params.alpha() + 2.0, 8.0});
}

double default_K_d(const ModelParams& params) {
    const double a = params.alpha();
    return std::ceil(std::max((24.0 * a + 21.0) / (2.0 * kSqrt2), 8.0 * (1.0 + a) / kSqrt2));
}

BarrierParams BarrierParams::with_defaults(const ModelParams& params, double t, double L,
                                           double ell, double z, double y) {
    BarrierParams bp;
    bp.t = t;
    bp.L = L;
    bp.ell = ell;
    bp.z = z;
    bp.y = y;
    bp.C_d = default_C_d(params);
    bp.K_d = default_K_d(params);
    return bp;
}

double linear_barrier(double a, double b, double T, double s) {
    if (!(T > 0.0)) throw std::domain_error("linear_barrier: T must be > 0");
    if (s < 0.0 || s > T) throw std::domain_error("linear_barrier: s outside [0, T]");
    return a + (b - a) * (s / T);
}

double ballot_probability(double x, double y, double a, double b, double T) {
    if (!(T > 0.0)) throw std::domain_error("ballot_probability: T must be > 0");
    if (a < x || b < y)
        throw std::domain_error("ballot_probability: requires a >= x and b >= y");
    return -std::expm1(-2.0 * (a - x) * (b - y) / T);
}

double barrier_B(double s, const ModelParams& params, const BarrierParams& bp) {
    if (!(bp.t > bp.L) || !(bp.L >= 1.0))
        throw std::domain_error("barrier_B: requires t > L >= 1");
    if (s < bp.L || s > bp.t) throw std::domain_error("barrier_B: s outside [L, t]");
    const double slope = centering(params, bp.t) / bp.t;
    return slope * s + bp.C_d * log_plus(std::min(s, bp.t - s)) + std::log(bp.L);
}

double barrier_B0(double s, const ModelParams& params, const BarrierParams& bp) {
    const double T0 = bp.t_tilde() - bp.ell;
    if (s < 0.0 || s > T0) throw std::domain_error("barrier_B0: s outside [0, t-L-ell]");
    const double slope = centering(params, bp.t) / bp.t;
    return slope * (s + bp.L) + bp.y + std::log(bp.ell) + bp.K_d * log_plus(std::min(s, T0 - s));
}

double barrier_Q(double s, const ModelParams& params, const BarrierParams& bp) {
    const double T0 = bp.t_tilde() - bp.ell;
    if (s < 0.0 || s > T0) throw std::domain_error("barrier_Q: s outside [0, t-L-ell]");
    const double l1 = bp.ell_1();
    const double top = coord_x(bp.L, 2.0 * std::pow(bp.L, 2.0 / 3.0));
    const double bot = coord_y(params, bp.t, bp.ell, bp.y, 2.0 * std::pow(bp.ell, 2.0 / 3.0));
    if (s <= l1) return top;
    if (s >= T0 - l1) return bot;
    return linear_barrier(top, bot, T0, s) - std::pow(std::min(s, T0 - s), 2.0 / 3.0);
}

bool check_barrier_event(const PathGrid& path, const BarrierSpec& spec) {
    if (!(spec.s_begin <= spec.s_end))
        throw std::invalid_argument("check_barrier_event: empty interval");
    if (!spec.upper && !spec.lower)
        throw std::invalid_argument("check_barrier_event: no barrier given");
    if (path.times.front() > spec.s_begin || path.times.back() < spec.s_end)
        throw std::invalid_argument("check_barrier_event: path grid does not cover the interval");
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double u = path.times[i];
        if (u < spec.s_begin || u > spec.s_end) continue;
        const double v = path.scalar(i);
        if (spec.upper && v > (*spec.upper)(u)) return false;
        if (spec.lower && v < (*spec.lower)(u)) return false;
    }
    return true;
}

TailEstimate mc_conditional_barrier(double x, double y, double T,
                                    const std::function<double(double)>& lower,
                                    const std::function<double(double)>& upper, std::int64_t n,
                                    double grid_step, RngStream& rng) {
    if (n <= 0) throw std::invalid_argument("mc_conditional_barrier: n must be > 0");
    const auto grid = uniform_grid(T, grid_step);
    std::int64_t accepted = 0, hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const PathGrid path = sample_bridge(x, y, T, grid, rng);
        bool below = true, above = true;
        for (std::size_t k = 0; k < path.size(); ++k) {
            const double u = path.times[k], v = path.values[k];
            if (v > upper(u)) {
                below = false;
                break;
            }
            if (v < lower(u)) above = false;
        }
        if (!below) continue;
        ++accepted;
        if (above) ++hits;
    }
    if (accepted == 0)
        throw std::runtime_error("mc_conditional_barrier: insufficient conditioning mass");
    auto est = TailEstimate::binomial(hits, accepted, rng.seed());
    est.n = accepted;
    return est;
}

}  // namespace bbm
