#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "resetridge/rng.hpp"

using resetridge::Rng;

TEST_CASE("same seed reproduces the exact stream") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(1234), d(1235);
    bool diverged = false;
    for (int i = 0; i < 10; ++i) diverged |= (c.next_u64() != d.next_u64());
    CHECK(diverged);
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1]") {
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("sampler moments agree with the distributions") {
    const int n = 200000;

    Rng rng(99);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.01);          // SE ~ 0.0022
    CHECK(std::abs(sq / n - 1.0) < 0.02);     // SE ~ 0.003

    sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(2.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));

    // gamma(shape=4, scale=0.5): mean 2, variance 1
    sum = 0.0;
    sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(4.0, 0.5);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));

    // shape < 1 branch: gamma(0.5, 2): mean 1, variance 2
    sum = 0.0;
    sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(0.5, 2.0);
        CHECK(x >= 0.0);
        sum += x;
        sq += x * x;
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(2.0).epsilon(0.06));
}

TEST_CASE("invalid sampler parameters throw") {
    Rng rng(1);
    CHECK_THROWS_AS(rng.exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(rng.gamma(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rng.gamma(1.0, 0.0), std::invalid_argument);
}
