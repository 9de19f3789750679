#include "bbm/checks.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "bbm/barrier.hpp"
#include "bbm/branching.hpp"
#include "bbm/girsanov.hpp"
#include "bbm/kernels.hpp"
#include "bbm/parallel.hpp"
#include "bbm/special.hpp"

namespace bbm {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

}  // namespace

std::vector<CheckResult> ballot_exactness_check(const OracleConfig& cfg) {
    // Richardson weights eliminating the sqrt(h) and h bias terms across
    // grids h, h/2, h/4 (coarse, mid, fine).
    const double w0 = 1.0 + kSqrt2;
    const double w1 = -(4.0 + 3.0 * kSqrt2);
    const double w2 = 4.0 + 2.0 * kSqrt2;

    std::vector<CheckResult> results;
    RngStream cfg_rng(cfg.seed, 0xBA1107ull);
    bool refinement_monotone = true;

    for (int c = 0; c < cfg.ballot_configs; ++c) {
        const double x = -1.0 + 2.0 * cfg_rng.next_double();
        const double y = -1.0 + 2.0 * cfg_rng.next_double();
        const double a = x + 0.3 + 1.2 * cfg_rng.next_double();
        const double b = y + 0.3 + 1.2 * cfg_rng.next_double();
        const double T = 0.5 + 2.5 * cfg_rng.next_double();
        const double exact = ballot_probability(x, y, a, b, T);

        const int fine_steps = cfg.ballot_base_steps * 4;
        std::vector<double> grid(static_cast<std::size_t>(fine_steps) + 1);
        std::vector<double> line(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid[i] = T * static_cast<double>(i) / fine_steps;
            line[i] = a + (b - a) * (grid[i] / T);
        }

        const std::int64_t n = cfg.ballot_n;
        std::vector<std::array<unsigned char, 3>> ok(static_cast<std::size_t>(n));
        parallel_replicates(n, cfg.workers, [&](std::int64_t i) {
            RngStream rng(cfg.seed,
                          derive_stream_id(0xBA1100ull + static_cast<std::uint64_t>(c),
                                           static_cast<std::uint64_t>(i)));
            std::array<unsigned char, 3> flags = {1, 1, 1};  // coarse, mid, fine
            double w = x;
            for (std::size_t k = 1; k < grid.size(); ++k) {
                const double remain = T - grid[k - 1];
                const double dt = grid[k] - grid[k - 1];
                const double mean = w + (y - w) * dt / remain;
                const double var = dt * (T - grid[k]) / remain;
                w = k + 1 == grid.size() ? y : mean + std::sqrt(std::max(var, 0.0)) * rng.next_gaussian();
                if (w > line[k]) {
                    flags[2] = 0;
                    if (k % 2 == 0) flags[1] = 0;
                    if (k % 4 == 0) flags[0] = 0;
                }
            }
            ok[static_cast<std::size_t>(i)] = flags;
        });

        std::array<std::int64_t, 3> hits = {0, 0, 0};
        for (const auto& f : ok)
            for (int j = 0; j < 3; ++j) hits[static_cast<std::size_t>(j)] += f[static_cast<std::size_t>(j)];
        const double nn = static_cast<double>(n);
        const std::array<double, 3> p = {hits[0] / nn, hits[1] / nn, hits[2] / nn};
        refinement_monotone = refinement_monotone && p[0] >= p[1] && p[1] >= p[2];

        const double extrap = w0 * p[0] + w1 * p[1] + w2 * p[2];
        // covariance of nested indicators: E[I_j I_k] = p(finer level)
        const std::array<double, 3> wt = {w0, w1, w2};
        double var = 0.0;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const double pjk = p[static_cast<std::size_t>(std::max(j, k))];
                var += wt[static_cast<std::size_t>(j)] * wt[static_cast<std::size_t>(k)] *
                       (pjk - p[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(k)]);
            }
        const double se = std::sqrt(std::max(var, 0.0) / nn);

        CheckResult r;
        r.name = fmt("ballot config %g (T=%.2f)", static_cast<double>(c), T);
        r.pass = std::abs(extrap - exact) <= 3.0 * se + 1e-12;
        r.detail = fmt("extrapolated=%.6f exact=%.6f stderr=%.6f", extrap, exact, se);
        results.push_back(std::move(r));
    }

    results.push_back({"ballot refinement bias direction (coarse >= mid >= fine)",
                       refinement_monotone, refinement_monotone ? "monotone" : "violated"});
    return results;
}

std::vector<CheckResult> girsanov_normalization_check(const OracleConfig& cfg) {
    std::vector<CheckResult> results;
    for (int d : cfg.girsanov_dims) {
        const ModelParams params(d);
        for (auto [x0, T] : d == 2 ? cfg.girsanov_x0_T_d2 : cfg.girsanov_x0_T) {
            const auto grid = uniform_grid(T, cfg.girsanov_grid_step);
            std::vector<double> weights(static_cast<std::size_t>(cfg.girsanov_n));
            std::vector<unsigned char> sign_ok(static_cast<std::size_t>(cfg.girsanov_n), 1);
            parallel_replicates(cfg.girsanov_n, cfg.workers, [&](std::int64_t i) {
                RngStream rng(cfg.seed, derive_stream_id(0x6769650ull + static_cast<std::uint64_t>(d),
                                                         static_cast<std::uint64_t>(i)));
                const PathGrid path = sample_bm_path(x0, grid, rng);
                const PathWeight pw = girsanov_log_weight(path, params);
                weights[static_cast<std::size_t>(i)] =
                    pw.positive_throughout ? std::exp(pw.log_weight) : 0.0;
                if (pw.positive_throughout) {
                    const double exp_term =
                        pw.log_weight - params.alpha() * std::log(path.back_scalar() / x0);
                    const bool ok = d == 2 ? exp_term >= -1e-12 : exp_term <= 1e-12;
                    sign_ok[static_cast<std::size_t>(i)] = ok ? 1 : 0;
                }
            });
            const auto est = TailEstimate::from_samples(weights, cfg.seed);
            bool all_signs = true;
            for (auto s : sign_ok) all_signs = all_signs && s;

            CheckResult r;
            r.name = fmt("girsanov normalization d=%g x0=%g T=%g", d, x0, T);
            r.pass = std::abs(est.value - 1.0) <= 3.0 * est.stderr_ && all_signs;
            r.detail = fmt("mean=%.4f stderr=%.4f", est.value, est.stderr_) +
                       (all_signs ? ", sign invariant holds" : ", SIGN INVARIANT VIOLATED");
            results.push_back(std::move(r));
        }
    }
    return results;
}

std::vector<CheckResult> many_to_few_check(const OracleConfig& cfg) {
    std::vector<CheckResult> results;
    for (double T : cfg.many_to_one_T) {
        std::vector<double> counts(static_cast<std::size_t>(cfg.many_to_one_n));
        parallel_replicates(cfg.many_to_one_n, cfg.workers, [&](std::int64_t i) {
            RngStream stream(cfg.seed, derive_stream_id(0x4e545031ull, static_cast<std::uint64_t>(i)));
            counts[static_cast<std::size_t>(i)] = static_cast<double>(sample_population(T, stream));
        });
        const auto est = TailEstimate::from_samples(counts, cfg.seed);
        const double target = std::exp(T);
        CheckResult r;
        r.name = fmt("many-to-one E[N_T]=e^T at T=%g", T);
        r.pass = std::abs(est.value - target) <= 3.0 * est.stderr_;
        r.detail = fmt("mean=%.3f target=%.3f stderr=%.3f", est.value, target, est.stderr_);
        results.push_back(std::move(r));
    }
    for (double T : cfg.many_to_two_T) {
        const auto est = many_to_two_moment_check(T, cfg.many_to_two_n, cfg.seed, cfg.workers);
        const double target = 2.0 * std::exp(2.0 * T) - std::exp(T);
        CheckResult r;
        r.name = fmt("many-to-two E[N_T^2]=2e^(2T)-e^T at T=%g", T);
        r.pass = std::abs(est.value - target) <= 3.0 * est.stderr_;
        r.detail = fmt("mean=%.3f target=%.3f stderr=%.3f", est.value, target, est.stderr_);
        results.push_back(std::move(r));
    }
    return results;
}

namespace {

struct ChiCtx {
    int d;
    double sqrtL;
};

double chi_scaled_cdf(double x, const void* ctx) {
    const auto* c = static_cast<const ChiCtx*>(ctx);
    return chi_cdf(c->d, x / c->sqrtL);
}

}  // namespace

std::vector<CheckResult> chi_marginal_check(const OracleConfig& cfg) {
    std::vector<CheckResult> results;
    const std::vector<double> grid = uniform_grid(cfg.chi_L, cfg.chi_L / 8.0);
    for (int d : cfg.chi_dims) {
        std::vector<double> samples(static_cast<std::size_t>(cfg.chi_n));
        parallel_replicates(cfg.chi_n, cfg.workers, [&](std::int64_t i) {
            RngStream rng(cfg.seed, derive_stream_id(0x63686900ull + static_cast<std::uint64_t>(d),
                                                     static_cast<std::uint64_t>(i)));
            samples[static_cast<std::size_t>(i)] =
                sample_bessel_path(d, 0.0, grid, rng).back_scalar();
        });
        ChiCtx ctx{d, std::sqrt(cfg.chi_L)};
        const auto ks = ks_test(samples, chi_scaled_cdf, &ctx);
        CheckResult r;
        r.name = fmt("bessel marginal KS vs sqrt(L) chi_d, d=%g", d);
        r.pass = ks.p_value >= 0.01;
        r.detail = fmt("D=%.5f p=%.4f", ks.statistic, ks.p_value);
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<CheckResult> run_oracle_suite(const OracleConfig& cfg) {
    std::vector<CheckResult> all;
    for (auto&& part : {ballot_exactness_check(cfg), girsanov_normalization_check(cfg),
                        many_to_few_check(cfg), chi_marginal_check(cfg)})
        all.insert(all.end(), part.begin(), part.end());
    return all;
}

}  // namespace bbm
