#include "bbm/branching.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "bbm/kernels.hpp"
#include "bbm/parallel.hpp"

namespace bbm {

namespace {

constexpr double kTimeTol = 1e-9;

bool near(double a, double b) { return std::abs(a - b) <= kTimeTol * std::max(1.0, std::abs(a)); }

double norm_of(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

/// Sample times strictly inside (birth, death): global grid multiples of
/// `grid_step` merged with the query times. Sorted, deduplicated.
void interior_times(double birth, double death, double grid_step,
                    std::span<const double> query_times, std::vector<double>& out) {
    out.clear();
    if (grid_step > 0.0) {
        auto k = static_cast<std::int64_t>(std::floor(birth / grid_step)) + 1;
        for (double tk = static_cast<double>(k) * grid_step; tk < death - kTimeTol;
             tk = static_cast<double>(++k) * grid_step)
            if (tk > birth + kTimeTol) out.push_back(tk);
    }
    if (!query_times.empty()) {
        for (double q : query_times)
            if (q > birth + kTimeTol && q < death - kTimeTol) out.push_back(q);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end(), near), out.end());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

ParticleTree simulate_horizon(const ModelParams& params, std::span<const double> origin, double T,
                              const PruneRule& prune, const SimConfig& config,
                              const RngStream& stream) {
    const int d = static_cast<int>(origin.size());
    ParticleTree tree;
    tree.d = d;
    tree.horizon = T;
    const std::uint64_t seed = stream.seed();

    // The pending entry at stack index i owns the position block i of
    // pos_stack, so the top entry always owns the top block.
    struct Pending {
        double birth;
        std::int64_t parent;
        std::uint64_t sid;
    };
    std::vector<Pending> stack;
    std::vector<double> pos_stack(origin.begin(), origin.end());
    stack.push_back({0.0, -1, stream.stream_id()});
    std::vector<double> cur(static_cast<std::size_t>(d));
    std::vector<double> interior;
    bool any_alive = false;

    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        const std::size_t off = stack.size() * static_cast<std::size_t>(d);
        std::copy_n(pos_stack.begin() + static_cast<std::ptrdiff_t>(off), d, cur.begin());
        pos_stack.resize(off);

        if (static_cast<std::int64_t>(tree.particles.size()) >= config.particle_cap)
            throw ResourceCapError("simulate_tree: particle cap exceeded");

        RngStream rng(seed, p.sid);
        const double tau = rng.next_exponential(params.branching_rate);
        const bool branches = p.birth + tau < T;
        const double death = branches ? p.birth + tau : T;

        Particle part;
        part.id = static_cast<std::int64_t>(tree.particles.size());
        part.parent = p.parent;
        part.birth_time = p.birth;
        part.stream_id = p.sid;
        part.seg_times.push_back(p.birth);
        part.seg_values.insert(part.seg_values.end(), cur.begin(), cur.end());

        interior_times(p.birth, death, config.grid_step, config.query_times, interior);
        if (death > p.birth + kTimeTol) interior.push_back(death);

        bool killed = prune.kills(p.birth, norm_of(cur));
        double kill_time = p.birth;
        if (!killed) {
            double prev = p.birth;
            for (double tk : interior) {
                const double sd = std::sqrt(tk - prev);
                for (auto& c : cur) c += sd * rng.next_gaussian();
                part.seg_times.push_back(tk);
                part.seg_values.insert(part.seg_values.end(), cur.begin(), cur.end());
                prev = tk;
                if (prune.kills(tk, norm_of(cur))) {
                    killed = true;
                    kill_time = tk;
                    break;
                }
            }
        }

        if (killed) {
            part.death_time = kill_time;
            part.fate = Particle::Fate::pruned;
            tree.particles.push_back(std::move(part));
            continue;
        }

        part.death_time = death;
        part.fate = branches ? Particle::Fate::branched : Particle::Fate::alive_at_horizon;
        any_alive = any_alive || !branches;
        if (branches) {
            // child 1 sits lower in the stack, child 0 is processed next
            pos_stack.insert(pos_stack.end(), cur.begin(), cur.end());
            pos_stack.insert(pos_stack.end(), cur.begin(), cur.end());
            stack.push_back({death, part.id, derive_stream_id(p.sid, 1)});
            stack.push_back({death, part.id, derive_stream_id(p.sid, 0)});
        }
        tree.particles.push_back(std::move(part));
    }
    tree.stop_reason = any_alive ? ParticleTree::StopReason::horizon
                                 : ParticleTree::StopReason::pruned_extinction;
    return tree;
}

ParticleTree simulate_population(const ModelParams& params, std::span<const double> origin,
                                 std::int64_t target, const SimConfig& config,
                                 const RngStream& stream) {
    const int d = static_cast<int>(origin.size());
    ParticleTree tree;
    tree.d = d;
    tree.stop_reason = ParticleTree::StopReason::population_cap;
    const std::uint64_t seed = stream.seed();

    // Each born particle keeps its RNG (already advanced past the clock
    // draw); its positions are sampled only once its death time is known, so
    // survivors can be cut exactly at the stop time.
    struct Born {
        double birth;
        std::int64_t parent_born;
        std::uint64_t sid;
        std::vector<double> pos;
        RngStream rng;
        std::int64_t particle = -1;
    };
    std::vector<Born> born;
    struct Event {
        double time;
        std::int64_t idx;
        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : idx > o.idx;
        }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;

    auto give_birth = [&](double birth, std::int64_t parent_born, std::uint64_t sid,
                          std::vector<double> pos) {
        RngStream rng(seed, sid);
        const double tau = rng.next_exponential(params.branching_rate);
        born.push_back({birth, parent_born, sid, std::move(pos), rng, -1});
        queue.push({birth + tau, static_cast<std::int64_t>(born.size()) - 1});
    };

    std::vector<double> interior;
    auto finalize = [&](std::int64_t bidx, double death, Particle::Fate fate) {
        Born& b = born[static_cast<std::size_t>(bidx)];
        Particle part;
        part.id = static_cast<std::int64_t>(tree.particles.size());
        part.parent =
            b.parent_born >= 0 ? born[static_cast<std::size_t>(b.parent_born)].particle : -1;
        part.birth_time = b.birth;
        part.death_time = death;
        part.fate = fate;
        part.stream_id = b.sid;
        part.seg_times.push_back(b.birth);
        part.seg_values.insert(part.seg_values.end(), b.pos.begin(), b.pos.end());
        interior_times(b.birth, death, config.grid_step, config.query_times, interior);
        if (death > b.birth + kTimeTol) interior.push_back(death);
        double prev = b.birth;
        for (double tk : interior) {
            const double sd = std::sqrt(tk - prev);
            for (auto& c : b.pos) c += sd * b.rng.next_gaussian();
            part.seg_times.push_back(tk);
            part.seg_values.insert(part.seg_values.end(), b.pos.begin(), b.pos.end());
            prev = tk;
        }
        b.particle = part.id;
        tree.particles.push_back(std::move(part));
        return b.particle;
    };

    give_birth(0.0, -1, stream.stream_id(), std::vector<double>(origin.begin(), origin.end()));
    if (target == 1) {
        finalize(0, 0.0, Particle::Fate::alive_at_horizon);
        tree.horizon = 0.0;
        return tree;
    }

    std::int64_t alive = 1;
    double stop_time = 0.0;
    while (alive < target) {
        if (queue.empty()) throw std::logic_error("simulate_tree: event queue drained");
        const Event ev = queue.top();
        queue.pop();
        if (static_cast<std::int64_t>(born.size()) + 2 > config.particle_cap)
            throw ResourceCapError("simulate_tree: particle cap exceeded");
        finalize(ev.idx, ev.time, Particle::Fate::branched);
        const std::vector<double> at = born[static_cast<std::size_t>(ev.idx)].pos;
        const std::uint64_t sid = born[static_cast<std::size_t>(ev.idx)].sid;
        give_birth(ev.time, ev.idx, derive_stream_id(sid, 0), at);
        give_birth(ev.time, ev.idx, derive_stream_id(sid, 1), at);
        alive += 1;
        stop_time = ev.time;
    }

    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        finalize(ev.idx, stop_time, Particle::Fate::alive_at_horizon);
    }
    tree.horizon = stop_time;
    return tree;
}

}  // namespace

ParticleTree simulate_tree(const ModelParams& params, std::span<const double> origin,
                           const StopRule& stop, const PruneRule& prune, const SimConfig& config,
                           const RngStream& stream) {
    if (origin.empty()) throw std::invalid_argument("simulate_tree: empty origin");
    if (!stop.horizon && !stop.population)
        throw std::invalid_argument("simulate_tree: no stop condition");
    if (stop.population) {
        if (prune.enabled)
            throw std::invalid_argument(
                "simulate_tree: pruning is only supported with a horizon stop");
        if (*stop.population < 1)
            throw std::invalid_argument("simulate_tree: population target must be >= 1");
        return simulate_population(params, origin, *stop.population, config, stream);
    }
    if (!(*stop.horizon >= 0.0))
        throw std::invalid_argument("simulate_tree: horizon must be >= 0");
    return simulate_horizon(params, origin, *stop.horizon, prune, config, stream);
}

ParticleTree simulate_from_window(double L, double z, double t, const ModelParams& params,
                                  const PruneRule& prune, const SimConfig& config,
                                  const RngStream& stream) {
    const double start = kSqrt2 * L - z;
    if (!(start > 0.0)) throw std::invalid_argument("simulate_from_window: needs sqrt(2)L - z > 0");
    if (!(t > L)) throw std::invalid_argument("simulate_from_window: needs t > L");
    std::vector<double> origin(static_cast<std::size_t>(params.d), 0.0);
    origin[0] = start;
    return simulate_tree(params, origin, StopRule::at_time(t - L), prune, config, stream);
}

// ---------------------------------------------------------------------------
// Tree queries
// ---------------------------------------------------------------------------

std::vector<std::int64_t> ParticleTree::alive_at(double t) const {
    std::vector<std::int64_t> out;
    for (const auto& p : particles) {
        if (p.birth_time > t + kTimeTol) continue;
        const bool inside = t < p.death_time - kTimeTol ||
                            (near(t, p.death_time) && p.fate == Particle::Fate::alive_at_horizon);
        if (inside) out.push_back(p.id);
    }
    return out;
}

std::span<const double> ParticleTree::value_at(std::int64_t id, double t) const {
    const Particle& p = particles[static_cast<std::size_t>(id)];
    auto it = std::lower_bound(p.seg_times.begin(), p.seg_times.end(), t - kTimeTol);
    if (it == p.seg_times.end() || !near(*it, t))
        throw std::invalid_argument("ParticleTree::value_at: t is not a stored sample time");
    const auto i = static_cast<std::size_t>(it - p.seg_times.begin());
    return {p.seg_values.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
}

double ParticleTree::radial_at(std::int64_t id, double t) const { return norm_of(value_at(id, t)); }

PathGrid ParticleTree::radial_ancestry(std::int64_t id, std::span<const double> at_times) const {
    std::vector<std::int64_t> chain;
    for (std::int64_t v = id; v >= 0; v = particles[static_cast<std::size_t>(v)].parent)
        chain.push_back(v);
    std::reverse(chain.begin(), chain.end());

    PathGrid out;
    out.dim = 1;
    out.times.assign(at_times.begin(), at_times.end());
    out.values.reserve(at_times.size());
    std::size_t ci = 0;
    for (double t : at_times) {
        while (ci + 1 < chain.size() &&
               particles[static_cast<std::size_t>(chain[ci])].death_time < t - kTimeTol)
            ++ci;
        out.values.push_back(radial_at(chain[ci], t));
    }
    return out;
}

PathGrid ParticleTree::radial_ancestry_full(std::int64_t id, double up_to) const {
    std::vector<std::int64_t> chain;
    for (std::int64_t v = id; v >= 0; v = particles[static_cast<std::size_t>(v)].parent)
        chain.push_back(v);
    std::reverse(chain.begin(), chain.end());

    PathGrid out;
    out.dim = 1;
    for (std::int64_t v : chain) {
        const Particle& p = particles[static_cast<std::size_t>(v)];
        if (p.birth_time > up_to + kTimeTol) break;
        for (std::size_t i = 0; i < p.seg_times.size(); ++i) {
            const double tk = p.seg_times[i];
            if (tk > up_to + kTimeTol) break;
            if (!out.times.empty() && near(out.times.back(), tk)) continue;  // segment joints
            out.times.push_back(tk);
            out.values.push_back(norm_of({p.seg_values.data() + i * static_cast<std::size_t>(d),
                                          static_cast<std::size_t>(d)}));
        }
    }
    return out;
}

namespace {

template <class Score>
MaxResult max_over_alive(const ParticleTree& tree, double t, Score&& score) {
    const auto alive = tree.alive_at(t);
    if (alive.empty()) throw ExtinctError("max query: no particle alive at the requested time");
    MaxResult best{-std::numeric_limits<double>::infinity(), -1};
    for (std::int64_t id : alive) {
        const double v = score(tree.value_at(id, t));
        if (v > best.value) best = {v, id};  // lowest id wins ties
    }
    return best;
}

}  // namespace

MaxResult max_modulus(const ParticleTree& tree, double t) {
    return max_over_alive(tree, t, [](std::span<const double> x) { return norm_of(x); });
}

MaxResult max_coordinate(const ParticleTree& tree, double t, int axis) {
    if (axis < 0 || axis >= tree.d) throw std::invalid_argument("max_coordinate: bad axis");
    return max_over_alive(tree, t, [axis](std::span<const double> x) {
        return x[static_cast<std::size_t>(axis)];
    });
}

// ---------------------------------------------------------------------------
// Streaming samplers (no tree materialization)
// ---------------------------------------------------------------------------

namespace {

/// Depth-first walk over the branching skeleton without materializing the
/// tree. The pending entry at stack index i owns state slot i; a branch
/// duplicates the parent's terminal state from slot i into slot i+1 and the
/// next-processed child takes the upper slot, so a pending sibling's state is
/// never clobbered by the subtree explored before it. Per-particle draw order
/// matches simulate_tree, so matched streams give matched realizations.
template <class Advance, class Fork, class AtHorizon>
void stream_tree(double T, double rate, const RngStream& stream, Advance&& advance, Fork&& fork,
                 AtHorizon&& at_horizon) {
    const std::uint64_t seed = stream.seed();
    struct Pending {
        double birth;
        std::uint64_t sid;
    };
    std::vector<Pending> stack;
    stack.push_back({0.0, stream.stream_id()});
    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        const std::size_t slot = stack.size();
        RngStream rng(seed, p.sid);
        const double tau = rng.next_exponential(rate);
        const bool branches = p.birth + tau < T;
        const double death = branches ? p.birth + tau : T;
        if (!advance(p.birth, death, slot, rng)) continue;  // pruned
        if (!branches) {
            at_horizon(slot);
            continue;
        }
        fork(slot, slot + 1);
        stack.push_back({death, derive_stream_id(p.sid, 1)});  // lower slot, processed later
        stack.push_back({death, derive_stream_id(p.sid, 0)});  // upper slot, processed next
    }
}

}  // namespace

std::optional<double> sample_max_modulus(const ModelParams& params, std::span<const double> origin,
                                         double T, const PruneRule& prune, double grid_step,
                                         const RngStream& stream) {
    const std::size_t d = origin.size();
    if (d == 0) throw std::invalid_argument("sample_max_modulus: empty origin");
    std::vector<double> pos(origin.begin(), origin.end());
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;

    // Grid stepping is tied to the rule's geometry, not its enabled flag, so
    // a pruned run and its unpruned matched-seed control consume identical
    // draws. Grid points far below the kill line are skipped: a kill cannot
    // fire there (radial values are nonnegative).
    auto advance = [&](double birth, double death, std::size_t slot, RngStream& rng) {
        double* x = pos.data() + slot * d;
        if (prune.kills(birth, norm_of({x, d}))) return false;
        double prev = birth;
        if (grid_step > 0.0) {
            auto k = static_cast<std::int64_t>(std::floor(birth / grid_step)) + 1;
            for (double tk = static_cast<double>(k) * grid_step; tk < death - kTimeTol;
                 tk = static_cast<double>(++k) * grid_step) {
                if (tk <= birth + kTimeTol || prune.line(tk) <= -1.0) continue;
                const double sd = std::sqrt(tk - prev);
                for (std::size_t j = 0; j < d; ++j) x[j] += sd * rng.next_gaussian();
                prev = tk;
                if (prune.kills(tk, norm_of({x, d}))) return false;
            }
        }
        if (death > prev + kTimeTol) {
            const double sd = std::sqrt(death - prev);
            for (std::size_t j = 0; j < d; ++j) x[j] += sd * rng.next_gaussian();
        }
        return !prune.kills(death, norm_of({x, d}));
    };
    auto fork = [&](std::size_t src, std::size_t dst) {
        if ((dst + 1) * d > pos.size()) pos.resize((dst + 1) * d);
        std::copy_n(pos.data() + src * d, d, pos.data() + dst * d);
    };
    auto at_horizon = [&](std::size_t slot) {
        any = true;
        best = std::max(best, norm_of({pos.data() + slot * d, d}));
    };
    stream_tree(T, params.branching_rate, stream, advance, fork, at_horizon);
    if (!any) return std::nullopt;
    return best;
}

std::int64_t sample_population(double T, const RngStream& stream, double rate) {
    std::int64_t count = 0;
    stream_tree(
        T, rate, stream, [](double, double, std::size_t, RngStream&) { return true; },
        [](std::size_t, std::size_t) {}, [&](std::size_t) { ++count; });
    return count;
}

std::optional<double> sample_max_1d(double rate, double x0, double T, const PruneRule& prune,
                                    double grid_step, const RngStream& stream) {
    std::vector<double> pos{x0};
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;

    auto advance = [&](double birth, double death, std::size_t slot, RngStream& rng) {
        double x = pos[slot];
        if (prune.kills(birth, x)) return false;
        double prev = birth;
        if (grid_step > 0.0) {
            auto k = static_cast<std::int64_t>(std::floor(birth / grid_step)) + 1;
            for (double tk = static_cast<double>(k) * grid_step; tk < death - kTimeTol;
                 tk = static_cast<double>(++k) * grid_step) {
                if (tk <= birth + kTimeTol) continue;
                x += std::sqrt(tk - prev) * rng.next_gaussian();
                prev = tk;
                if (prune.kills(tk, x)) return false;
            }
        }
        if (death > prev + kTimeTol) x += std::sqrt(death - prev) * rng.next_gaussian();
        pos[slot] = x;
        return !prune.kills(death, x);
    };
    auto fork = [&](std::size_t src, std::size_t dst) {
        if (dst + 1 > pos.size()) pos.resize(dst + 1);
        pos[dst] = pos[src];
    };
    auto at_horizon = [&](std::size_t slot) {
        any = true;
        best = std::max(best, pos[slot]);
    };
    stream_tree(T, rate, stream, advance, fork, at_horizon);
    if (!any) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------------------
// Window statistics and good-particle counts
// ---------------------------------------------------------------------------

double compute_Z(const ParticleTree& tree, double L, const ModelParams& params,
                 NormalizerVariant variant) {
    if (L > tree.horizon + kTimeTol) throw std::invalid_argument("compute_Z: L beyond horizon");
    double sum = 0.0, comp = 0.0;  // Kahan
    for (std::int64_t id : tree.alive_at(L)) {
        const double r = tree.radial_at(id, L);
        if (!in_window(r, L)) continue;
        const double gap = kSqrt2 * L - r;
        const double base = variant == NormalizerVariant::radial_power ? r : kSqrt2 * L;
        const double term = std::pow(base, -params.alpha()) * gap * std::exp(-gap * kSqrt2);
        const double cy = term - comp;
        const double cs = sum + cy;
        comp = (cs - sum) - cy;
        sum = cs;
    }
    return sum;
}

GoodParticleCount count_good_particles(const ParticleTree& tree, const ModelParams& params,
                                       const BarrierParams& bp) {
    const double t_tilde = bp.t_tilde();
    const double T0 = t_tilde - bp.ell;
    if (tree.horizon + kTimeTol < t_tilde)
        throw std::invalid_argument("count_good_particles: tree horizon is before t - L");
    const double m_t = centering(params, bp.t);
    const double slope = m_t / bp.t;
    const double endpoint_floor = bp.t / std::sqrt(static_cast<double>(params.d));
    const double y_anchor = slope * (bp.t - bp.ell) + bp.y;  // front coordinate at time t - ell

    // Descendant maxima at the terminal time t - L, attributed to the
    // ancestor alive at T0 = t - L - ell.
    std::unordered_map<std::int64_t, double> descendant_max;
    for (const auto& p : tree.particles) {
        if (p.fate != Particle::Fate::alive_at_horizon || !near(p.death_time, t_tilde)) continue;
        const double r = tree.radial_at(p.id, t_tilde);
        std::int64_t v = p.id;
        while (v >= 0 && tree.particles[static_cast<std::size_t>(v)].birth_time > T0 + kTimeTol)
            v = tree.particles[static_cast<std::size_t>(v)].parent;
        if (v < 0) continue;
        auto [it, inserted] = descendant_max.try_emplace(v, r);
        if (!inserted) it->second = std::max(it->second, r);
    }

    GoodParticleCount out;
    for (std::int64_t v : tree.alive_at(T0)) {
        const auto it = descendant_max.find(v);
        const bool tail_event = it != descendant_max.end() && it->second > m_t + bp.y;
        if (!tail_event) continue;  // both F and G require the descendant event

        bool below_B0 = true, in_corridor = true;
        if (!bp.disable_track_constraints) {
            const PathGrid track = tree.radial_ancestry_full(v, T0);
            for (std::size_t i = 0; i < track.size(); ++i) {
                const double s = std::clamp(track.times[i], 0.0, T0);
                const double r = track.values[i];
                if (r > barrier_B0(s, params, bp)) below_B0 = false;
                if (r > slope * (s + bp.L) + bp.y || r < barrier_Q(s, params, bp))
                    in_corridor = false;
                if (!below_B0 && !in_corridor) break;
            }
        }
        const double r_end = tree.radial_at(v, T0);
        const double w = y_anchor - r_end;
        const bool endpoint_f = bp.disable_endpoint_constraints || r_end > endpoint_floor;
        const bool endpoint_g = bp.disable_endpoint_constraints ||
                                (w >= std::pow(bp.ell, 1.0 / 3.0) &&
                                 w <= std::pow(bp.ell, 2.0 / 3.0));
        if (below_B0 && endpoint_f) ++out.gamma;
        if (in_corridor && endpoint_g) ++out.lambda_bar;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Many-to-few oracles
// ---------------------------------------------------------------------------

std::pair<TailEstimate, TailEstimate> many_to_one_check(const RadialFunctional& f,
                                                        const ModelParams& params, double x0,
                                                        double T, std::int64_t n_tree,
                                                        std::int64_t n_single, double grid_step,
                                                        std::uint64_t seed, int workers) {
    if (T > 700.0) throw std::overflow_error("many_to_one_check: e^T overflows");
    const auto grid = uniform_grid(T, grid_step);
    std::vector<double> origin(static_cast<std::size_t>(params.d), 0.0);
    origin[0] = x0;

    std::vector<double> tree_sums(static_cast<std::size_t>(n_tree));
    parallel_replicates(n_tree, workers, [&](std::int64_t i) {
        RngStream stream(seed, derive_stream_id(0x6d746f31ull, static_cast<std::uint64_t>(i)));
        SimConfig config;
        config.grid_step = grid_step;
        const ParticleTree tree =
            simulate_tree(params, origin, StopRule::at_time(T), PruneRule{}, config, stream);
        double sum = 0.0;
        for (std::int64_t id : tree.alive_at(T)) sum += f(tree.radial_ancestry(id, grid));
        tree_sums[static_cast<std::size_t>(i)] = sum;
    });

    std::vector<double> single_vals(static_cast<std::size_t>(n_single));
    parallel_replicates(n_single, workers, [&](std::int64_t i) {
        RngStream rng(seed, derive_stream_id(0x73676c31ull, static_cast<std::uint64_t>(i)));
        single_vals[static_cast<std::size_t>(i)] = f(sample_bessel_path(params.d, x0, grid, rng));
    });

    auto lhs = TailEstimate::from_samples(tree_sums, seed);
    auto rhs = TailEstimate::from_samples(single_vals, seed);
    const double scale = std::exp(T);
    rhs.value *= scale;
    rhs.stderr_ *= scale;
    return {lhs, rhs};
}

TailEstimate many_to_two_moment_check(double T, std::int64_t n, std::uint64_t seed, int workers) {
    if (T > 30.0) throw std::overflow_error("many_to_two_moment_check: population too large");
    std::vector<double> sq(static_cast<std::size_t>(n));
    parallel_replicates(n, workers, [&](std::int64_t i) {
        RngStream stream(seed, derive_stream_id(0x6d746f32ull, static_cast<std::uint64_t>(i)));
        const double m = static_cast<double>(sample_population(T, stream));
        sq[static_cast<std::size_t>(i)] = m * m;
    });
    return TailEstimate::from_samples(sq, seed);
}

// ---------------------------------------------------------------------------
// Coupled 1-d BBM / branching Bessel realization
// ---------------------------------------------------------------------------

CouplingRealization couple_once(const ModelParams& params, double x0, double ell, double grid_step,
                                const RngStream& stream) {
    if (!(x0 > 0.0)) throw std::invalid_argument("couple_once: x0 must be > 0");
    if (!(grid_step > 0.0)) throw std::invalid_argument("couple_once: grid_step must be > 0");
    const double alpha = params.alpha();

    CouplingRealization out;
    out.min_radial = x0;
    out.max_w_terminal = -std::numeric_limits<double>::infinity();
    out.max_r_terminal = -std::numeric_limits<double>::infinity();

    // Per-slot state: the (W, R) pair driven by the same increments; R is
    // integrated by Euler steps on the grid.
    std::vector<std::array<double, 2>> state{{x0, x0}};
    auto advance = [&](double birth, double death, std::size_t slot, RngStream& rng) {
        double w = state[slot][0], r = state[slot][1];
        double prev = birth;
        auto k = static_cast<std::int64_t>(std::floor(birth / grid_step)) + 1;
        while (true) {
            const double tk = static_cast<double>(k) * grid_step;
            const bool last = tk >= death - kTimeTol;
            const double t_next = last ? death : tk;
            const double dt = t_next - prev;
            if (dt > 0.0) {
                const double dw = std::sqrt(dt) * rng.next_gaussian();
                w += dw;
                r += alpha / std::max(r, 1e-12) * dt + dw;
                out.max_discrepancy = std::max(out.max_discrepancy, std::abs(r - w));
                out.min_gap = std::min(out.min_gap, r - w);
                out.min_radial = std::min(out.min_radial, r);
                prev = t_next;
            }
            if (last) break;
            ++k;
        }
        state[slot] = {w, r};
        return true;
    };
    auto fork = [&](std::size_t src, std::size_t dst) {
        if (dst + 1 > state.size()) state.resize(dst + 1);
        state[dst] = state[src];
    };
    auto at_horizon = [&](std::size_t slot) {
        out.max_w_terminal = std::max(out.max_w_terminal, state[slot][0]);
        out.max_r_terminal = std::max(out.max_r_terminal, state[slot][1]);
    };
    stream_tree(ell, params.branching_rate, stream, advance, fork, at_horizon);
    return out;
}

// ---------------------------------------------------------------------------
// JSON export
// ---------------------------------------------------------------------------

std::string tree_to_json(const ParticleTree& tree) {
    nlohmann::json j;
    j["schema"] = "bbm-tree/1";
    j["d"] = tree.d;
    j["horizon"] = tree.horizon;
    switch (tree.stop_reason) {
        case ParticleTree::StopReason::horizon: j["stop_reason"] = "horizon"; break;
        case ParticleTree::StopReason::population_cap: j["stop_reason"] = "population-cap"; break;
        case ParticleTree::StopReason::pruned_extinction:
            j["stop_reason"] = "pruned-extinction";
            break;
    }
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : tree.particles) {
        nlohmann::json q;
        q["id"] = p.id;
        if (p.parent >= 0) q["parent"] = p.parent;
        q["birth"] = p.birth_time;
        q["death"] = p.death_time;
        q["fate"] = p.fate == Particle::Fate::branched
                        ? "branched"
                        : (p.fate == Particle::Fate::alive_at_horizon ? "alive" : "pruned");
        q["times"] = p.seg_times;
        q["values"] = p.seg_values;
        parts.push_back(std::move(q));
    }
    j["particles"] = std::move(parts);
    return j.dump();
}

}  // namespace bbm
