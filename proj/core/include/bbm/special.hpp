#pragma once

#include <cstddef>
#include <span>

namespace bbm {

/// Standard normal CDF.
double normal_cdf(double x);

/// Regularized lower incomplete gamma P(a,x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Density of the chi distribution with d degrees of freedom (d >= 1).
double chi_pdf(int d, double x);
double chi_log_pdf(int d, double x);

/// CDF of the chi distribution with d degrees of freedom.
double chi_cdf(int d, double x);

/// Kolmogorov limiting tail Q(lambda) = P(sup|B| > lambda), lambda > 0.
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic;  // sup-norm distance D_n
    double p_value;    // via the Kolmogorov asymptotic with Stephens' correction
};

/// One-sample Kolmogorov-Smirnov test of `samples` (modified in place by
/// sorting) against the CDF values produced by `cdf`.
KsResult ks_test(std::span<double> samples, double (*cdf)(double, const void*), const void* ctx);

/// Two-sample KS test; both inputs are sorted in place.
KsResult ks_test_two_sample(std::span<double> a, std::span<double> b);

}  // namespace bbm
