#include "bbm/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

namespace {

// Series expansion of P(a,x), converges fast for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) = 1 - P(a,x), for x >= a+1 (modified Lentz).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be > 0");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double chi_log_pdf(int d, double x) {
    if (d < 1) throw std::domain_error("chi_log_pdf: d must be >= 1");
    if (x < 0.0) return -std::numeric_limits<double>::infinity();
    if (x == 0.0) return d == 1 ? std::log(std::sqrt(2.0 / 3.14159265358979323846))
                                : -std::numeric_limits<double>::infinity();
    const double hd = 0.5 * d;
    return (1.0 - hd) * std::log(2.0) + (d - 1) * std::log(x) - 0.5 * x * x - std::lgamma(hd);
}

double chi_pdf(int d, double x) {
    const double lp = chi_log_pdf(d, x);
    return std::isinf(lp) ? 0.0 : std::exp(lp);
}

double chi_cdf(int d, double x) {
    if (d < 1) throw std::domain_error("chi_cdf: d must be >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * d, 0.5 * x * x);
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<double> samples, double (*cdf)(double, const void*), const void* ctx) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i], ctx);
        d_stat = std::max(d_stat, std::max((i + 1) / n - f, f - i / n));
    }
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d_stat;  // Stephens 1970
    return {d_stat, kolmogorov_q(lambda)};
}

KsResult ks_test_two_sample(std::span<double> a, std::span<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d_stat = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d_stat = std::max(d_stat, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d_stat;
    return {d_stat, kolmogorov_q(lambda)};
}

}  // namespace bbm
