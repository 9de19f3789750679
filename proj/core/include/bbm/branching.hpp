#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbm/barrier.hpp"
#include "bbm/estimate.hpp"
#include "bbm/model.hpp"
#include "bbm/path.hpp"
#include "bbm/rng.hpp"

namespace bbm {

/// Thrown when a simulation exceeds the configured hard particle cap.
struct ResourceCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown by queries at a time where no particle is alive.
struct ExtinctError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Kill rule for population control: a particle dies when its radial value
/// drops below sqrt(2) s - beta log(s+2) - K at a sampled time. Disabled by
/// default; any bias is measured against unpruned matched-seed runs, never
/// assumed away.
struct PruneRule {
    bool enabled = false;
    double beta = 0.0;
    double K = 40.0;

    double line(double s) const { return kSqrt2 * s - beta * std::log(s + 2.0) - K; }
    bool kills(double s, double radial) const { return enabled && radial < line(s); }
};

/// Stop condition: a fixed horizon, or the first moment the alive population
/// reaches `population`.
struct StopRule {
    std::optional<double> horizon;
    std::optional<std::int64_t> population;

    static StopRule at_time(double T) { return {T, std::nullopt}; }
    static StopRule at_population(std::int64_t N) { return {std::nullopt, N}; }
};

struct SimConfig {
    /// Spacing of the global sampling grid (positions stored at multiples of
    /// this step). 0 disables interior grid samples; positions are then kept
    /// only at birth, branch, query and horizon times.
    double grid_step = 0.0;
    /// Extra absolute times at which positions must be stored.
    std::vector<double> query_times;
    /// Hard cap on materialized particles.
    std::int64_t particle_cap = 10'000'000;
};

struct Particle {
    enum class Fate : std::uint8_t { branched, alive_at_horizon, pruned };

    std::int64_t id = 0;
    std::int64_t parent = -1;
    double birth_time = 0.0;
    double death_time = 0.0;
    Fate fate = Fate::alive_at_horizon;
    std::uint64_t stream_id = 0;
    /// Sampled times in [birth, death] and positions (d values per time).
    std::vector<double> seg_times;
    std::vector<double> seg_values;
};

struct ParticleTree {
    enum class StopReason : std::uint8_t { horizon, population_cap, pruned_extinction };

    int d = 1;
    double horizon = 0.0;
    StopReason stop_reason = StopReason::horizon;
    std::vector<Particle> particles;

    /// Ids of particles alive at time t (birth <= t < death, horizon leaves
    /// inclusive at their death time).
    std::vector<std::int64_t> alive_at(double t) const;

    /// Position of a particle at a stored sample time (throws if t was not
    /// sampled for that particle).
    std::span<const double> value_at(std::int64_t id, double t) const;
    double radial_at(std::int64_t id, double t) const;

    /// Radial values of the concatenated ancestry of `id` at the requested
    /// absolute times (all must be stored sample times along the ancestry).
    PathGrid radial_ancestry(std::int64_t id, std::span<const double> at_times) const;

    /// Full stored radial ancestry up to and including `up_to`.
    PathGrid radial_ancestry_full(std::int64_t id, double up_to) const;
};

/// Simulates a d-dimensional binary BBM tree from `origin`. Branch times are
/// exact exponential clocks at the model rate; increments are exact Gaussians
/// between consecutive sample times (grid, branch, query, horizon), so there
/// is no discretization error in population dynamics. Deterministic given
/// (stream, config): per-particle streams are derived from the genealogy.
ParticleTree simulate_tree(const ModelParams& params, std::span<const double> origin,
                           const StopRule& stop, const PruneRule& prune, const SimConfig& config,
                           const RngStream& stream);

/// Branching Bessel process started at radial value sqrt(2)L - z (> 0
/// required), realized as a d-dimensional tree from ((sqrt(2)L - z), 0, ...)
/// with horizon t - L.
ParticleTree simulate_from_window(double L, double z, double t, const ModelParams& params,
                                  const PruneRule& prune, const SimConfig& config,
                                  const RngStream& stream);

struct MaxResult {
    double value = 0.0;
    std::int64_t argmax = -1;  // ties broken by lowest particle id
};

MaxResult max_modulus(const ParticleTree& tree, double t);
MaxResult max_coordinate(const ParticleTree& tree, double t, int axis);

/// Streaming maximum-modulus sampler: same law and same draws as
/// simulate_tree + max_modulus at matched streams, but nothing is stored.
/// Returns nullopt if pruning extinguished the population. `grid_step` adds
/// kill-check sample points near the rule's line; the stepping depends on the
/// rule's geometry but not on its enabled flag, so toggling `enabled` at a
/// fixed stream yields draw-for-draw matched realizations.
std::optional<double> sample_max_modulus(const ModelParams& params, std::span<const double> origin,
                                         double T, const PruneRule& prune, double grid_step,
                                         const RngStream& stream);

/// Alive population at time T; branching skeleton only, no positions.
std::int64_t sample_population(double T, const RngStream& stream, double rate = 1.0);

/// Streaming 1-d BBM maximum (signed coordinate) from x0 at time T; the
/// prune rule, when enabled, applies to the coordinate value.
std::optional<double> sample_max_1d(double rate, double x0, double T, const PruneRule& prune,
                                    double grid_step, const RngStream& stream);

/// Window statistic at time L: sum over alive particles with R_L in the
/// window of pow^(-alpha) (sqrt(2)L - R_L) exp(-(sqrt(2)L - R_L) sqrt(2)),
/// where pow is R_L or sqrt(2)L per the variant. Compensated summation;
/// an empty window gives 0.
double compute_Z(const ParticleTree& tree, double L, const ModelParams& params,
                 NormalizerVariant variant = NormalizerVariant::radial_power);

struct GoodParticleCount {
    std::int64_t gamma = 0;       // F-events
    std::int64_t lambda_bar = 0;  // G-events
};

/// Counts, among particles alive at time t-L-ell of a tree started in the
/// window (time 0 of the tree = time L of the original process):
///   gamma:      radial track below B0 on [0, t-L-ell], endpoint > t/sqrt(d),
///               and some descendant radial value at time t-L above m_t + y;
///   lambda_bar: track inside the corridor (below (m_t/t)(s+L)+y, above Q),
///               endpoint with coord_y offset in [ell^(1/3), ell^(2/3)], and
///               the same descendant condition.
/// The descendant maximum is evaluated at the terminal time t-L only.
GoodParticleCount count_good_particles(const ParticleTree& tree, const ModelParams& params,
                                       const BarrierParams& bp);

/// Path functional of a scalar radial track on a fixed uniform grid.
using RadialFunctional = std::function<double(const PathGrid&)>;

/// Tree-sum estimator vs e^T-weighted single-path estimator of the same
/// functional; the two agree in expectation. Both sides evaluate f on the
/// identical uniform grid, so the comparison carries no discretization gap.
std::pair<TailEstimate, TailEstimate> many_to_one_check(const RadialFunctional& f,
                                                        const ModelParams& params, double x0,
                                                        double T, std::int64_t n_tree,
                                                        std::int64_t n_single, double grid_step,
                                                        std::uint64_t seed, int workers = 0);

/// Monte Carlo estimate of E[N_T^2], to compare against 2 e^(2T) - e^T.
TailEstimate many_to_two_moment_check(double T, std::int64_t n, std::uint64_t seed,
                                      int workers = 0);

/// One realization of the shared-noise coupling of a 1-d BBM and a branching
/// Bessel process from x0: same branch times, same driving increments, the
/// Bessel track integrated by Euler steps of size grid_step.
struct CouplingRealization {
    double max_discrepancy = 0.0;  // sup over particles and sample times of |R - W|
    double min_gap = 0.0;          // min of R - W; the coupling keeps R >= W
    double min_radial = 0.0;       // min over particles and sample times of R
    double max_w_terminal = 0.0;   // 1-d BBM maximum at the horizon
    double max_r_terminal = 0.0;   // branching Bessel maximum at the horizon
};

CouplingRealization couple_once(const ModelParams& params, double x0, double ell,
                                double grid_step, const RngStream& stream);

/// Versioned JSON export of genealogy and sampled positions.
std::string tree_to_json(const ParticleTree& tree);

}  // namespace bbm
