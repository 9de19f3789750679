#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "bbm/branching.hpp"
#include "bbm/special.hpp"

using namespace bbm;

namespace {

const std::vector<double> kOrigin2{0.0, 0.0};

ParticleTree quick_tree(double T, std::uint64_t rep, double grid_step = 0.0,
                        std::vector<double> query = {}, int d = 2) {
    SimConfig config;
    config.grid_step = grid_step;
    config.query_times = std::move(query);
    std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
    RngStream stream(99, derive_stream_id(0x7e57ull, rep));
    return simulate_tree(ModelParams(d), origin, StopRule::at_time(T), PruneRule{}, config,
                         stream);
}

}  // namespace

TEST_CASE("horizon 0 keeps the single root alive") {
    const auto tree = quick_tree(0.0, 1);
    CHECK(tree.particles.size() == 1);
    CHECK(tree.alive_at(0.0).size() == 1);
    CHECK(tree.stop_reason == ParticleTree::StopReason::horizon);
}

TEST_CASE("population stop yields exactly the requested alive count") {
    SimConfig config;
    RngStream stream(3, 17);
    const auto tree = simulate_tree(ModelParams(2), kOrigin2, StopRule::at_population(10000),
                                    PruneRule{}, config, stream);
    CHECK(tree.alive_at(tree.horizon).size() == 10000);
    CHECK(tree.stop_reason == ParticleTree::StopReason::population_cap);
    CHECK(tree.particles.size() == 2 * 10000 - 1);  // binary tree bookkeeping

    // pruning plus population stop is rejected
    PruneRule prune;
    prune.enabled = true;
    CHECK_THROWS_AS(simulate_tree(ModelParams(2), kOrigin2, StopRule::at_population(10),
                                  prune, config, stream),
                    std::invalid_argument);
}

TEST_CASE("mean population matches e^T") {
    const double T = 5.0;
    const std::int64_t n = 10000;
    std::vector<double> counts;
    counts.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream stream(11, derive_stream_id(0xABCDull, static_cast<std::uint64_t>(i)));
        counts.push_back(static_cast<double>(sample_population(T, stream)));
    }
    const auto est = TailEstimate::from_samples(counts, 11);
    CHECK(std::abs(est.value - std::exp(T)) <= 3.0 * est.stderr_);
}

TEST_CASE("structural invariants on simulated trees") {
    for (std::uint64_t rep = 0; rep < 25; ++rep) {
        const auto tree = quick_tree(4.0, rep, 0.125);
        // binary branching: alive(t) = 1 + branches strictly realized by t
        for (double t : {1.0, 2.5, 4.0}) {
            std::int64_t branches = 0;
            for (const auto& p : tree.particles)
                branches += p.fate == Particle::Fate::branched && p.death_time <= t + 1e-12;
            CHECK(static_cast<std::int64_t>(tree.alive_at(t).size()) == 1 + branches);
        }
        // every non-leaf has exactly two children
        std::map<std::int64_t, int> child_count;
        for (const auto& p : tree.particles)
            if (p.parent >= 0) ++child_count[p.parent];
        for (const auto& p : tree.particles) {
            if (p.fate == Particle::Fate::branched)
                CHECK(child_count[p.id] == 2);
            else
                CHECK(child_count.find(p.id) == child_count.end());
        }
        // genealogy continuity: a child's first sample equals its parent's last
        for (const auto& p : tree.particles) {
            if (p.parent < 0) continue;
            const auto& q = tree.particles[static_cast<std::size_t>(p.parent)];
            CHECK(p.birth_time == q.death_time);
            for (int j = 0; j < tree.d; ++j)
                CHECK(p.seg_values[static_cast<std::size_t>(j)] ==
                      q.seg_values[q.seg_values.size() - static_cast<std::size_t>(tree.d) +
                                   static_cast<std::size_t>(j)]);
        }
    }
}

TEST_CASE("determinism: identical streams give identical trees") {
    const auto a = quick_tree(5.0, 7, 0.25);
    const auto b = quick_tree(5.0, 7, 0.25);
    CHECK(tree_to_json(a) == tree_to_json(b));
}

TEST_CASE("streaming maximum equals the materialized tree maximum") {
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
        RngStream s1(99, derive_stream_id(0x7e57ull, rep));
        const auto streamed = sample_max_modulus(ModelParams(2), kOrigin2, 6.0, PruneRule{}, 0.0,
                                                 s1);
        const auto tree = quick_tree(6.0, rep);
        CHECK(*streamed == max_modulus(tree, 6.0).value);
    }
}

TEST_CASE("max queries") {
    SUBCASE("a never-branching particle reports its own modulus") {
        ModelParams lazy(2);
        lazy.branching_rate = 1e-12;
        SimConfig config;
        RngStream stream(5, 1);
        const auto tree =
            simulate_tree(lazy, kOrigin2, StopRule::at_time(1.0), PruneRule{}, config, stream);
        REQUIRE(tree.particles.size() == 1);
        const auto m = max_modulus(tree, 1.0);
        CHECK(m.argmax == 0);
        CHECK(m.value == tree.radial_at(0, 1.0));
    }
    SUBCASE("modulus dominates any coordinate maximum") {
        for (std::uint64_t rep = 0; rep < 10; ++rep) {
            const auto tree = quick_tree(4.0, 100 + rep);
            const double rmax = max_modulus(tree, 4.0).value;
            for (int axis : {0, 1})
                CHECK(rmax >= std::abs(max_coordinate(tree, 4.0, axis).value) - 1e-12);
        }
        CHECK_THROWS_AS(max_coordinate(quick_tree(1.0, 1), 1.0, 5), std::invalid_argument);
    }
    SUBCASE("suppressed branching at T=0.1: modulus is sqrt(T) chi_2") {
        ModelParams lazy(2);
        lazy.branching_rate = 1e-12;
        const double T = 0.1;
        std::vector<double> samples;
        samples.reserve(20000);
        for (std::uint64_t i = 0; i < 20000; ++i) {
            RngStream stream(6, derive_stream_id(0xF00Dull, i));
            const auto r = sample_max_modulus(lazy, kOrigin2, T, PruneRule{}, 0.0, stream);
            samples.push_back(*r);
        }
        struct Ctx {
            double sqrtT;
        } ctx{std::sqrt(T)};
        const auto ks = ks_test(
            samples,
            [](double x, const void* c) {
                return chi_cdf(2, x / static_cast<const Ctx*>(c)->sqrtT);
            },
            &ctx);
        CHECK(ks.p_value >= 0.01);
    }
    SUBCASE("fully pruned population reports extinction") {
        PruneRule brutal;
        brutal.enabled = true;
        brutal.K = -100.0;  // kill line above every reachable value
        SimConfig config;
        RngStream stream(7, 1);
        const auto tree = simulate_tree(ModelParams(2), kOrigin2, StopRule::at_time(2.0), brutal,
                                        config, stream);
        CHECK(tree.stop_reason == ParticleTree::StopReason::pruned_extinction);
        CHECK_THROWS_AS(max_modulus(tree, 2.0), ExtinctError);
        RngStream stream2(7, 1);
        CHECK_FALSE(
            sample_max_modulus(ModelParams(2), kOrigin2, 2.0, brutal, 0.0, stream2).has_value());
    }
}

TEST_CASE("value_at only serves stored sample times") {
    const auto tree = quick_tree(2.0, 3, 0.5);
    CHECK_NOTHROW(tree.value_at(0, 0.0));
    CHECK_THROWS_AS(tree.value_at(0, 0.1234567), std::invalid_argument);
}

TEST_CASE("window statistic Z_L") {
    const ModelParams params(2);
    SUBCASE("single synthetic particle reproduces the tail normalizer") {
        const double L = 9.0, z = 3.0;
        ParticleTree tree;
        tree.d = 1;
        tree.horizon = L;
        Particle p;
        p.id = 0;
        p.birth_time = 0.0;
        p.death_time = L;
        p.fate = Particle::Fate::alive_at_horizon;
        p.seg_times = {0.0, L};
        p.seg_values = {0.1, kSqrt2 * L - z};
        tree.particles.push_back(p);
        CHECK(compute_Z(tree, L, params) ==
              doctest::Approx(tail_normalizer(L, z, 0.0, params).value).epsilon(1e-13));
        // additivity over disjoint particle sets
        Particle q = p;
        q.id = 1;
        q.seg_values = {0.1, kSqrt2 * L - 2.0};
        tree.particles.push_back(q);
        CHECK(compute_Z(tree, L, params) ==
              doctest::Approx(tail_normalizer(L, z, 0.0, params).value +
                              tail_normalizer(L, 2.0, 0.0, params).value)
                  .epsilon(1e-13));
        // particle outside the window contributes nothing
        Particle r = p;
        r.id = 2;
        r.seg_values = {0.1, kSqrt2 * L};
        tree.particles.push_back(r);
        CHECK(compute_Z(tree, L, params) ==
              doctest::Approx(tail_normalizer(L, z, 0.0, params).value +
                              tail_normalizer(L, 2.0, 0.0, params).value)
                  .epsilon(1e-13));
    }
    SUBCASE("empty window gives zero, simulated Z is never negative") {
        for (std::uint64_t rep = 0; rep < 20; ++rep) {
            const auto tree = quick_tree(3.0, 500 + rep);
            CHECK(compute_Z(tree, 3.0, params) >= 0.0);
        }
        // at tiny L the window is a point; the statistic is 0 almost surely
        const auto tree = quick_tree(1.0, 999);
        CHECK(compute_Z(tree, 1.0, params) == 0.0);
    }
}

TEST_CASE("good-particle counts") {
    const ModelParams params(2);
    // y < 0 lowers the descendant level so successes are not ~1% rare, while
    // z + y + log(ell) + o_t L stays positive so the start clears B0(0)
    const double L = 4.0, z = 2.2, t = 12.0, ell = 1.2, y = -0.6;
    SimConfig config;
    config.grid_step = 0.05;
    config.query_times = {t - L - ell};

    SUBCASE("lambda_bar <= gamma on every realization") {
        std::int64_t nonzero = 0;
        for (std::uint64_t rep = 0; rep < 300; ++rep) {
            RngStream stream(21, derive_stream_id(0x900Dull, rep));
            const auto tree = simulate_from_window(L, z, t, params, PruneRule{}, config, stream);
            const auto bp = BarrierParams::with_defaults(params, t, L, ell, z, y);
            const auto counts = count_good_particles(tree, params, bp);
            CHECK(counts.lambda_bar <= counts.gamma);
            nonzero += counts.gamma > 0 ? 1 : 0;
        }
        CHECK(nonzero > 0);  // the configuration is not vacuous
    }
    SUBCASE("no successful descendant means zero counts") {
        RngStream stream(22, 1);
        const auto tree = simulate_from_window(L, z, t, params, PruneRule{}, config, stream);
        auto bp = BarrierParams::with_defaults(params, t, L, ell, z, 1e6);  // unreachable level
        const auto counts = count_good_particles(tree, params, bp);
        CHECK(counts.gamma == 0);
        CHECK(counts.lambda_bar == 0);
    }
    SUBCASE("degenerate constraints count exactly the successful ancestors") {
        RngStream stream(23, 2);
        const auto tree = simulate_from_window(L, z, t, params, PruneRule{}, config, stream);
        auto bp = BarrierParams::with_defaults(params, t, L, ell, z, y);
        bp.disable_track_constraints = true;
        bp.disable_endpoint_constraints = true;
        const auto counts = count_good_particles(tree, params, bp);

        // oracle: count ancestors at T0 with a descendant above m_t + y at t-L
        const double T0 = t - L - ell;
        const double level = centering(params, t) + y;
        std::int64_t expected = 0;
        for (std::int64_t v : tree.alive_at(T0)) {
            bool success = false;
            for (std::int64_t leaf : tree.alive_at(t - L)) {
                std::int64_t u = leaf;
                while (u >= 0 && u != v) u = tree.particles[static_cast<std::size_t>(u)].parent;
                if (u == v && tree.radial_at(leaf, t - L) > level) success = true;
            }
            expected += success ? 1 : 0;
        }
        CHECK(counts.gamma == expected);
        CHECK(counts.lambda_bar == expected);
    }
}

TEST_CASE("many-to-one and many-to-two oracles (quick)") {
    const ModelParams params(2);
    SUBCASE("f = 1 recovers e^T on both sides") {
        const auto [lhs, rhs] = many_to_one_check([](const PathGrid&) { return 1.0; }, params,
                                                  0.0, 3.0, 3000, 10000, 0.5, 71);
        const double target = std::exp(3.0);
        CHECK(std::abs(lhs.value - target) <= 3.0 * lhs.stderr_);
        CHECK(std::abs(rhs.value - target) <= 1e-9);  // single side is exact for f = 1
    }
    SUBCASE("f = 0 gives exact zeros") {
        const auto [lhs, rhs] = many_to_one_check([](const PathGrid&) { return 0.0; }, params,
                                                  0.0, 2.0, 200, 200, 0.5, 72);
        CHECK(lhs.value == 0.0);
        CHECK(rhs.value == 0.0);
    }
    SUBCASE("window indicator at T=2 agrees across estimators") {
        auto f = [](const PathGrid& p) {
            const double r = p.back_scalar();
            return r >= 1.0 && r <= 3.0 ? 1.0 : 0.0;
        };
        const auto [lhs, rhs] = many_to_one_check(f, params, 1.0, 2.0, 4000, 40000, 0.25, 73);
        const double se = std::hypot(lhs.stderr_, rhs.stderr_);
        CHECK(std::abs(lhs.value - rhs.value) <= 3.0 * se);
    }
    SUBCASE("second moment of the population") {
        const auto at0 = many_to_two_moment_check(0.0, 100, 74);
        CHECK(at0.value == 1.0);
        CHECK(at0.stderr_ == 0.0);
        const auto at1 = many_to_two_moment_check(1.0, 100000, 75);
        CHECK(std::abs(at1.value - 12.059830369402255) <= 3.0 * at1.stderr_);
        const auto at3 = many_to_two_moment_check(3.0, 100000, 76);
        CHECK(std::abs(at3.value - 786.77205006228258) <= 3.0 * at3.stderr_);
        CHECK_THROWS_AS(many_to_two_moment_check(100.0, 10, 77), std::overflow_error);
    }
}

TEST_CASE("window-start simulation") {
    const ModelParams params(2);
    SimConfig config;
    RngStream stream(31, 5);
    const double L = 9.0;
    SUBCASE("starts at the requested window depth") {
        const auto tree = simulate_from_window(L, std::pow(L, 1.0 / 6.0), L + 1e-9, params,
                                               PruneRule{}, config, stream);
        CHECK(tree.particles[0].seg_values[0] ==
              doctest::Approx(coord_x(L, std::pow(L, 1.0 / 6.0))).epsilon(1e-15));
    }
    SUBCASE("horizon ~ 0 reports the start value as the maximum") {
        RngStream s(31, 6);
        const auto tree = simulate_from_window(L, 3.0, L + 1e-12, params, PruneRule{}, config, s);
        CHECK(max_modulus(tree, tree.horizon).value ==
              doctest::Approx(kSqrt2 * L - 3.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(simulate_from_window(1.0, 2.0, 3.0, params, PruneRule{}, config, stream),
                    std::invalid_argument);  // sqrt(2)L - z <= 0
}

TEST_CASE("particle cap raises a resource error") {
    SimConfig config;
    config.particle_cap = 100;
    RngStream stream(41, 1);
    CHECK_THROWS_AS(simulate_tree(ModelParams(2), kOrigin2, StopRule::at_time(8.0), PruneRule{},
                                  config, stream),
                    ResourceCapError);
}

TEST_CASE("far-below kill line never changes the maximum at t=10") {
    PruneRule rule;
    rule.enabled = true;
    rule.K = 40.0;  // line stays negative until s ~ 28
    int diffs = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        RngStream a(51, derive_stream_id(0xAAA1ull, rep));
        RngStream b(51, derive_stream_id(0xAAA1ull, rep));
        const auto pruned = sample_max_modulus(ModelParams(2), kOrigin2, 10.0, rule, 0.25, a);
        PruneRule off = rule;
        off.enabled = false;
        const auto control = sample_max_modulus(ModelParams(2), kOrigin2, 10.0, off, 0.25, b);
        diffs += (!pruned || *pruned != *control) ? 1 : 0;
    }
    CHECK(diffs == 0);
}

TEST_CASE("coupled 1-d BBM and branching Bessel") {
    const ModelParams params(2);
    const double x0 = 100.0, ell = 1.0;
    const double bound = 4.0 * params.alpha() * ell / x0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        RngStream stream(61, derive_stream_id(0xC0DEull, rep));
        const auto real = couple_once(params, x0, ell, 1e-3, stream);
        CHECK(real.min_gap >= -1e-12);  // R dominates W pathwise
        if (real.min_radial >= x0 / 4.0) CHECK(real.max_discrepancy <= bound + 5e-3);
        CHECK(real.max_r_terminal >= real.max_w_terminal);
    }
}

TEST_CASE("tree JSON export carries the schema and genealogy") {
    const auto tree = quick_tree(2.0, 9, 0.5);
    const auto parsed = nlohmann::json::parse(tree_to_json(tree));
    CHECK(parsed["schema"] == "bbm-tree/1");
    CHECK(parsed["d"] == 2);
    CHECK(parsed["particles"].size() == tree.particles.size());
    CHECK(parsed["stop_reason"] == "horizon");
}
