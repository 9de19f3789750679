#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bbm/model.hpp"

namespace bbm {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Knobs for the analytic-vs-Monte-Carlo oracle suite. The defaults are the
/// quick `verify` configuration; the acceptance suite turns them up.
struct OracleConfig {
    std::uint64_t seed = 20240901;
    int workers = 0;

    int ballot_configs = 5;
    std::int64_t ballot_n = 200'000;
    int ballot_base_steps = 64;  // refined twice by halving

    std::vector<int> girsanov_dims = {2, 3, 5};
    /// Start points for the normalization check. For d = 2 the exponential
    /// term has positive sign, so a path lingering near 0 without a
    /// grid-visible crossing carries a weight of order exp(h/eps^2): the
    /// estimator has unbounded discretization artifacts at small x0. The
    /// d = 2 pairs therefore start high enough that the near-zero
    /// probability over the whole run is ~1e-7.
    std::vector<std::pair<double, double>> girsanov_x0_T = {{1.0, 0.5}, {5.0, 2.0}};
    std::vector<std::pair<double, double>> girsanov_x0_T_d2 = {{4.0, 0.5}, {8.0, 2.0}};
    std::int64_t girsanov_n = 20'000;
    double girsanov_grid_step = 1e-3;

    std::vector<double> many_to_one_T = {1.0, 3.0};
    std::int64_t many_to_one_n = 20'000;
    std::vector<double> many_to_two_T = {1.0};
    std::int64_t many_to_two_n = 50'000;

    std::vector<int> chi_dims = {1, 2, 3, 5};
    double chi_L = 2.0;
    std::int64_t chi_n = 100'000;
};

/// Bridge Monte Carlo vs the closed ballot formula at three grid refinements
/// with sqrt(h)+h Richardson extrapolation; one result per sampled
/// configuration plus one for the refinement-monotonicity record.
std::vector<CheckResult> ballot_exactness_check(const OracleConfig& cfg);

/// Change-of-measure normalization E[weight] = 1 and the per-path sign of
/// the exponential term (nonnegative for d = 2, nonpositive for d >= 3).
std::vector<CheckResult> girsanov_normalization_check(const OracleConfig& cfg);

/// E[N_T] = e^T and E[N_T^2] = 2 e^(2T) - e^T at 3-stderr tolerance.
std::vector<CheckResult> many_to_few_check(const OracleConfig& cfg);

/// KS test of the time-L Bessel marginal from the origin against
/// sqrt(L) chi_d at significance 0.01.
std::vector<CheckResult> chi_marginal_check(const OracleConfig& cfg);

/// The full oracle suite in a fixed order.
std::vector<CheckResult> run_oracle_suite(const OracleConfig& cfg);

}  // namespace bbm
