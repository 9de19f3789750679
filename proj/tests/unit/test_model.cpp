#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bbm/model.hpp"

using namespace bbm;

namespace {
constexpr double kE = 2.7182818284590452354;
}

TEST_CASE("model params derive alpha and c_d exactly") {
    for (int d = 1; d <= 8; ++d) {
        const ModelParams p(d);
        CHECK(p.alpha() == 0.5 * (d - 1));
        CHECK(p.c_d() == (d - 4) / (2.0 * kSqrt2));
        CHECK(p.branching_rate == 1.0);
    }
    CHECK_THROWS_AS(ModelParams(0), std::invalid_argument);
}

TEST_CASE("centering closed form") {
    // d=4 kills the log term
    CHECK(centering(ModelParams(4), 100.0) == doctest::Approx(100.0 * kSqrt2).epsilon(1e-15));
    // d=1 at t=e: sqrt(2) e - 3/(2 sqrt 2)
    CHECK(centering(ModelParams(1), kE) ==
          doctest::Approx(kSqrt2 * kE - 3.0 / (2.0 * kSqrt2)).epsilon(1e-15));
    // d=2 at t=e, frozen from an independent high-precision evaluation
    CHECK(centering(ModelParams(2), kE) == doctest::Approx(3.1371242469725693).epsilon(1e-15));

    CHECK_THROWS_AS(centering(ModelParams(2), 0.0), std::domain_error);
    CHECK_THROWS_AS(centering(ModelParams(2), -1.0), std::domain_error);
    CHECK(centering_warns(0.5));
    CHECK_FALSE(centering_warns(2.0));
    // t in (0,1] is permitted, with the warning; the log term flips sign
    CHECK(centering(ModelParams(2), 0.5) ==
          doctest::Approx(kSqrt2 * 0.5 + (-1.0 / kSqrt2) * std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("offset o_t closed form and identity with centering") {
    const ModelParams d4(4);
    CHECK(offset_o_t(d4, 3.7) == 0.0);
    CHECK(offset_o_t(ModelParams(2), 1.0) == 0.0);
    // d=2 at t=e^2, frozen independent evaluation of -2/(e^2 sqrt 2)
    CHECK(offset_o_t(ModelParams(2), kE * kE) ==
          doctest::Approx(-0.19139299302082185).epsilon(1e-14));
    for (int d : {1, 2, 3, 5}) {
        const ModelParams p(d);
        for (double t : {1.5, 2.0, 7.0, 42.0, 900.0}) {
            CHECK(centering(p, t) / t - kSqrt2 ==
                  doctest::Approx(offset_o_t(p, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("front coordinates") {
    CHECK(coord_x(9.0, 0.0) == kSqrt2 * 9.0);
    CHECK(coord_x(9.0, kSqrt2 * 9.0) == 0.0);
    // d=4: m_t/t = sqrt(2), so coord_y(t=100, ell=4, y=0, b=0) = 96 sqrt 2
    CHECK(coord_y(ModelParams(4), 100.0, 4.0, 0.0, 0.0) ==
          doctest::Approx(96.0 * kSqrt2).epsilon(1e-15));
}

TEST_CASE("window endpoints and membership") {
    SUBCASE("L=64") {
        const double lo = kSqrt2 * 64.0 - 16.0;  // 64^(2/3) = 16
        const double hi = kSqrt2 * 64.0 - 2.0;   // 64^(1/6) = 2
        const WindowSpec w{64.0};
        CHECK(w.lo() == doctest::Approx(lo).epsilon(1e-14));
        CHECK(w.hi() == doctest::Approx(hi).epsilon(1e-14));
        CHECK(in_window(lo, 64.0));  // closed interval
        CHECK(in_window(hi, 64.0));
        CHECK_FALSE(in_window(kSqrt2 * 64.0, 64.0));
    }
    SUBCASE("L=1 degenerates to a point") {
        CHECK(WindowSpec{1.0}.lo() == WindowSpec{1.0}.hi());
        CHECK(in_window(kSqrt2 - 1.0, 1.0));
    }
    SUBCASE("lo <= hi for all L >= 1, endpoints are coord_x images") {
        for (double L : {1.0, 2.0, 5.0, 9.0, 64.0, 1000.0}) {
            const WindowSpec w{L};
            CHECK(w.lo() <= w.hi());
            CHECK(w.lo() == doctest::Approx(coord_x(L, std::pow(L, 2.0 / 3.0))));
            CHECK(w.hi() == doctest::Approx(coord_x(L, std::pow(L, 1.0 / 6.0))));
        }
    }
    SUBCASE("configurable exponents") {
        WindowSpec w{64.0, 0.2, 0.55};
        CHECK(w.hi() == doctest::Approx(kSqrt2 * 64.0 - std::pow(64.0, 0.2)));
        CHECK(w.lo() == doctest::Approx(kSqrt2 * 64.0 - std::pow(64.0, 0.55)));
    }
}

TEST_CASE("tail normalizer") {
    SUBCASE("closed-form spot values") {
        // d=1: the power factor is 1
        CHECK(tail_normalizer(9.0, 1.0, 0.0, ModelParams(1)).value ==
              doctest::Approx(std::exp(-kSqrt2)).epsilon(1e-14));
        // y = -z kills the exponential factor
        const ModelParams d3(3);
        CHECK(tail_normalizer(9.0, 2.0, -2.0, d3).value ==
              doctest::Approx(std::pow(kSqrt2 * 9.0 - 2.0, -1.0) * 2.0).epsilon(1e-14));
        // frozen independent evaluation of (sqrt(2) 64 - 4)^-1 * 4 * e^(-5 sqrt 2)
        CHECK(tail_normalizer(64.0, 4.0, 1.0, d3).value ==
              doctest::Approx(3.9270787852239045e-05).epsilon(1e-13));
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(tail_normalizer(2.0, kSqrt2 * 2.0, 0.0, ModelParams(2)),
                        std::domain_error);
        CHECK_THROWS_AS(tail_normalizer(2.0, 4.0, 0.0, ModelParams(2)), std::domain_error);
        CHECK_THROWS_AS(tail_normalizer(2.0, 0.0, 0.0, ModelParams(2)), std::domain_error);
    }
    SUBCASE("log-space agrees with naive evaluation where it does not overflow") {
        const ModelParams p(3);
        for (double z : {0.5, 1.0, 3.0, 8.0}) {
            for (double y : {-2.0, 0.0, 5.0, 40.0}) {
                const auto tn = tail_normalizer(64.0, z, y, p);
                const double naive =
                    std::pow(kSqrt2 * 64.0 - z, -p.alpha()) * z * std::exp(-(z + y) * kSqrt2);
                CHECK(tn.value == doctest::Approx(naive).epsilon(1e-12));
            }
        }
    }
    SUBCASE("overflow-safe for large z+y") {
        const auto tn = tail_normalizer(400.0, 1.0, 700.0 / kSqrt2, ModelParams(2));
        CHECK(std::isfinite(tn.log_value.log_value));
        CHECK(tn.value >= 0.0);
    }
    SUBCASE("increasing in small z, log-concave in z") {
        const ModelParams p(2);
        const double h = 1e-3;
        double prev = 0.0;
        for (double z = h; z < 0.5; z += h) {
            const double v = tail_normalizer(64.0, z, 0.5, p).value;
            CHECK(v > prev);
            prev = v;
        }
        for (double z = 1.0; z < 20.0; z += 0.25) {
            const double a = tail_normalizer(64.0, z - h, 0.0, p).log_value.log_value;
            const double b = tail_normalizer(64.0, z, 0.0, p).log_value.log_value;
            const double c = tail_normalizer(64.0, z + h, 0.0, p).log_value.log_value;
            CHECK(a + c - 2.0 * b <= 1e-9);  // second difference nonpositive
        }
    }
    SUBCASE("variant ratio identity") {
        const ModelParams p(5);
        const double L = 30.0, z = 4.0, y = 1.0;
        const double radial = tail_normalizer(L, z, y, p, NormalizerVariant::radial_power).value;
        const double front = tail_normalizer(L, z, y, p, NormalizerVariant::sqrt2L_power).value;
        CHECK(radial / front ==
              doctest::Approx(std::pow((kSqrt2 * L - z) / (kSqrt2 * L), -p.alpha())));
    }
}

TEST_CASE("log value saturation") {
    CHECK(LogValue::from_log(800.0).linear() ==
          std::numeric_limits<double>::infinity());
    CHECK(LogValue::from_log(800.0).saturated());
    CHECK(LogValue::from_log(-800.0).linear() == 0.0);
    CHECK(LogValue::from_linear(0.0).is_zero());
    CHECK(LogValue::from_log(1.0).linear() == doctest::Approx(std::exp(1.0)));
}
