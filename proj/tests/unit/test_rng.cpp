#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbm/rng.hpp"

using namespace bbm;

TEST_CASE("identical (seed, stream_id) reproduces the sequence exactly") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(42, 7), d(42, 7);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.next_gaussian() == d.next_gaussian());
        CHECK(c.next_exponential() == d.next_exponential());
    }
}

TEST_CASE("distinct stream ids decorrelate") {
    RngStream a(42, 1), b(42, 2);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) equal += a.next_u64() == b.next_u64() ? 1 : 0;
    CHECK(equal == 0);

    // crude correlation check between two streams
    RngStream c(42, 3), d(42, 4);
    double dot = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) dot += c.next_gaussian() * d.next_gaussian();
    CHECK(std::abs(dot / n) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("stream id derivation is deterministic and splits") {
    CHECK(derive_stream_id(5, 0) == derive_stream_id(5, 0));
    CHECK(derive_stream_id(5, 0) != derive_stream_id(5, 1));
    CHECK(derive_stream_id(5, 0) != derive_stream_id(6, 0));
    RngStream parent(9, 11);
    CHECK(parent.child(0).stream_id() == derive_stream_id(11, 0));
}

TEST_CASE("uniform and open-interval draws stay in range") {
    RngStream r(1, 1);
    double mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 3.0 / std::sqrt(12.0 * n));
    for (int i = 0; i < 100000; ++i) {
        const double u = r.next_open01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gaussian moments") {
    RngStream r(2024, 5);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = r.next_gaussian();
        s1 += g;
        s2 += g * g;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("exponential clock statistics") {
    RngStream r(7, 3);
    const int n = 1000000;
    double mean = 0.0;
    int beyond2 = 0;
    for (int i = 0; i < n; ++i) {
        const double t = r.next_exponential();
        CHECK(t > 0.0);
        mean += t;
        beyond2 += t > 2.0 ? 1 : 0;
    }
    mean /= n;
    CHECK(std::abs(mean - 1.0) <= 0.003);  // 3 stderr at n = 1e6
    const double p = static_cast<double>(beyond2) / n;
    const double target = std::exp(-2.0);
    CHECK(std::abs(p - target) <= 3.0 * std::sqrt(target * (1.0 - target) / n));
}
