#include "bbm/model.hpp"

#include <stdexcept>

namespace bbm {

ModelParams::ModelParams(int dim) : d(dim) {
    if (dim < 1) throw std::invalid_argument("ModelParams: dimension must be >= 1");
}

double centering(const ModelParams& params, double t) {
    if (t <= 0.0) throw std::domain_error("centering: t must be > 0");
    return kSqrt2 * t + params.c_d() * std::log(t);
}

double offset_o_t(const ModelParams& params, double t) {
    if (t <= 0.0) throw std::domain_error("offset_o_t: t must be > 0");
    return params.c_d() * std::log(t) / t;
}

double coord_x(double L, double a) { return kSqrt2 * L - a; }

double coord_y(const ModelParams& params, double t, double ell, double y, double b) {
    return (centering(params, t) / t) * (t - ell) + y - b;
}

bool in_window(double r, double L) { return WindowSpec{L}.contains(r); }

TailNormalizer tail_normalizer(double L, double z, double y, const ModelParams& params,
                               NormalizerVariant variant) {
    if (!(z > 0.0) || !(kSqrt2 * L > z))
        throw std::domain_error("tail_normalizer: requires sqrt(2)*L > z > 0");
    const double base = variant == NormalizerVariant::radial_power ? kSqrt2 * L - z : kSqrt2 * L;
    const double lv = -params.alpha() * std::log(base) + std::log(z) - (z + y) * kSqrt2;
    TailNormalizer out;
    out.L = L;
    out.z = z;
    out.y = y;
    out.log_value = LogValue::from_log(lv);
    out.value = out.log_value.linear();
    return out;
}

}  // namespace bbm
