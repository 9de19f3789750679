#pragma once

#include <cmath>
#include <limits>

namespace bbm {

/// A nonnegative quantity carried in log space. The linear view saturates at
/// 0 / +inf instead of producing NaN or silently overflowing; `saturated()`
/// reports when that happened. exp(709) is roughly the double overflow edge.
struct LogValue {
    double log_value = -std::numeric_limits<double>::infinity();

    static LogValue from_log(double lv) { return LogValue{lv}; }
    static LogValue from_linear(double v) {
        return LogValue{v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity()};
    }

    double linear() const {
        if (log_value > kOverflowEdge) return std::numeric_limits<double>::infinity();
        if (log_value < -kOverflowEdge) return 0.0;
        return std::exp(log_value);
    }
    bool saturated() const { return std::abs(log_value) > kOverflowEdge && std::isfinite(log_value); }
    bool is_zero() const { return std::isinf(log_value) && log_value < 0; }

    LogValue operator*(const LogValue& o) const { return LogValue{log_value + o.log_value}; }
    LogValue operator/(const LogValue& o) const { return LogValue{log_value - o.log_value}; }

  private:
    static constexpr double kOverflowEdge = 709.0;
};

}  // namespace bbm
