#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"
#include "sublinopt/sampling.hpp"

using namespace sublinopt;
using test_helpers::dot;
using test_helpers::make_matrix;
using test_helpers::random_unit;

TEST_SUITE("sampling") {

TEST_CASE("clip saturates at the given level") {
    CHECK(clip(0.5, 1.0) == 0.5);
    CHECK(clip(5.0, 1.0) == 1.0);
    CHECK(clip(-5.0, 1.0) == -1.0);
    CHECK(clip(1.0, 1.0) == 1.0);
}

TEST_CASE("l2 sampling of a point mass is deterministic") {
    Rng rng(1);
    std::vector<double> x = {1.0, 0.0, 0.0};
    for (int k = 0; k < 20; ++k) {
        auto s = l2_sample(x, rng);
        REQUIRE(s.has_value());
        CHECK(s->j == 0);
        CHECK(s->inv_coord == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("l2 sampling frequencies follow squared coordinates") {
    Rng rng(2);
    std::vector<double> x = {0.6, 0.8};
    const int N = 100000;
    int hits0 = 0;
    for (int k = 0; k < N; ++k) {
        auto s = l2_sample(x, rng);
        REQUIRE(s.has_value());
        if (s->j == 0) ++hits0;
    }
    // True probability 0.36; 4 sigma of the binomial is ~0.006.
    CHECK(static_cast<double>(hits0) / N == doctest::Approx(0.36).epsilon(0.03));
}

TEST_CASE("row estimate expectation enumerated over both outcomes") {
    // x = (0.6, 0.8), A_i = (0.3, 0.4): P(j)*A_i(j)*||x||^2/x(j) summed over j
    // must equal A_i . x = 0.5.
    std::vector<double> x = {0.6, 0.8}, a = {0.3, 0.4};
    double sq = x[0] * x[0] + x[1] * x[1];
    double expectation = 0.0;
    for (int j = 0; j < 2; ++j) {
        double pj = x[j] * x[j] / sq;
        expectation += pj * a[j] * sq / x[j];
    }
    CHECK(expectation == doctest::Approx(0.5).epsilon(1e-14));

    // Every realized sample gives 0.5 here because A_i is parallel to x.
    DataMatrix m = make_matrix({a});
    Rng rng(3);
    AccessCounter c;
    for (int k = 0; k < 50; ++k) {
        auto s = l2_sample(x, rng);
        REQUIRE(s.has_value());
        CHECK(l2_estimate_row(m, 0, *s, c) == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(c.entries_read == 50);
}

TEST_CASE("row estimates on basis vectors") {
    DataMatrix m = make_matrix({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<double> x = {1.0, 0.0};
    Rng rng(4);
    AccessCounter c;
    auto s = l2_sample(x, rng);
    REQUIRE(s.has_value());
    CHECK(l2_estimate_row(m, 0, *s, c) == doctest::Approx(1.0));  // aligned
    CHECK(l2_estimate_row(m, 1, *s, c) == 0.0);                   // orthogonal
}

TEST_CASE("zero vector signals instead of sampling") {
    Rng rng(5);
    std::vector<double> zero = {0.0, 0.0, 0.0};
    CHECK_FALSE(l2_sample(zero, rng).has_value());

    L2Sampler sampler;
    sampler.assign(zero);
    CHECK(sampler.zero());
    CHECK_FALSE(sampler.sample(rng).has_value());
}

TEST_CASE("denormal coordinates are treated as zero") {
    Rng rng(6);
    std::vector<double> x = {1e-301, 0.0};
    CHECK_FALSE(l2_sample(x, rng).has_value());
}

TEST_CASE("l1 sampling honors point masses and validates the simplex") {
    Rng rng(7);
    CHECK(l1_sample({1.0, 0.0, 0.0}, rng) == 0);
    CHECK_THROWS_AS(l1_sample({0.5, -0.1, 0.6}, rng), std::invalid_argument);
    CHECK_THROWS_AS(l1_sample({0.3, 0.3}, rng), std::invalid_argument);
}

TEST_CASE("l1 sampling frequencies on a fair coin") {
    Rng rng(8);
    const int N = 100000;
    int ones = 0;
    for (int k = 0; k < N; ++k) ones += static_cast<int>(l1_sample({0.5, 0.5}, rng));
    CHECK(static_cast<double>(ones) / N == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("l1 sampling passes a chi-square goodness-of-fit check") {
    Rng rng(9);
    std::vector<double> p = {0.2, 0.3, 0.5};
    const int N = 100000;
    std::vector<int> counts(3, 0);
    for (int k = 0; k < N; ++k) ++counts[l1_sample(p, rng)];
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double expected = N * p[i];
        double diff = counts[i] - expected;
        chi2 += diff * diff / expected;
    }
    // 2 degrees of freedom; the 0.001 quantile is 13.816.
    CHECK(chi2 < 13.816);
}

TEST_CASE("estimate_dot is exact on an aligned point mass") {
    Rng rng(10);
    std::vector<double> e1 = {1.0, 0.0};
    for (double eps : {0.5, 0.1, 0.01})
        CHECK(estimate_dot(e1, e1, eps, 0.1, rng) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("estimate_dot returns exactly zero for a zero vector") {
    Rng rng(11);
    std::vector<double> zero = {0.0, 0.0}, v = {0.5, 0.5};
    CHECK(estimate_dot(zero, v, 0.1, 0.1, rng) == 0.0);
}

TEST_CASE("estimate_dot validates eps and delta") {
    Rng rng(12);
    std::vector<double> v = {1.0, 0.0};
    CHECK_THROWS_AS(estimate_dot(v, v, 0.0, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(estimate_dot(v, v, 0.1, 1.0, rng), std::invalid_argument);
}

TEST_CASE("estimate_dot meets its accuracy guarantee on orthonormal inputs") {
    Rng rng(13);
    std::vector<double> u = {1.0, 0.0}, v = {0.0, 1.0};
    const int trials = 1000;
    int ok = 0;
    for (int k = 0; k < trials; ++k)
        if (std::abs(estimate_dot(u, v, 0.1, 0.01, rng)) <= 0.1) ++ok;
    CHECK(ok >= 990);  // failure probability is at most 0.01 per trial
}

TEST_CASE("l2 estimates are unbiased with bounded second moment") {
    Rng rng(14);
    const int pairs = 100, N = 100000;
    for (int p = 0; p < pairs; ++p) {
        const std::size_t d = 2 + rng.uniform_below(19);
        auto x = random_unit(rng, d, 0.3 + 0.7 * rng.uniform01());
        auto a = random_unit(rng, d, 0.3 + 0.7 * rng.uniform01());
        DataMatrix m = make_matrix({a});
        const double exact = dot(a, x);

        L2Sampler sampler;
        sampler.assign(x);
        AccessCounter c;
        double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
        for (int k = 0; k < N; ++k) {
            auto s = sampler.sample(rng);
            REQUIRE(s.has_value());
            double v = l2_estimate_row(m, 0, *s, c);
            sum += v;
            sum_sq += v * v;
            sum_4 += v * v * v * v;
        }
        const double mean = sum / N;
        const double m2 = sum_sq / N;
        const double var = std::max(m2 - mean * mean, 0.0);
        const double se_mean = std::sqrt(var / N);
        CHECK(std::abs(mean - exact) <= 4.0 * se_mean + 1e-12);

        // E[v^2] <= ||a||^2 ||x||^2, with 3 standard errors of the empirical
        // second moment (spread of v^2 taken from the fourth moment).
        const double bound = test_helpers::sq_norm(a) * test_helpers::sq_norm(x);
        const double se_m2 = std::sqrt(std::max(sum_4 / N - m2 * m2, 0.0) / N);
        CHECK(m2 <= bound + 3.0 * se_m2 + 1e-9);
    }
}

TEST_CASE("clipping bias on two-point distributions stays under 1/V") {
    // Exact enumeration: X = a with prob p, else b.  In the regime the
    // algorithms use clipping (|E[X]| <= 1, Var <= 1, V = 1/eta >= 4/3) the
    // bias |E[clip(X,V)] - E[X]| never exceeds Var/V <= 1/V.
    for (double V : {4.0 / 3.0, 2.0, 10.0, 100.0}) {
        for (double p : {0.01, 0.1, 0.5, 0.9, 0.99}) {
            for (double a : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
                // choose b on a grid, keep only (mean, variance)-admissible
                for (double b = -3.0 * V; b <= 3.0 * V; b += V / 8.0) {
                    const double mean = p * a + (1 - p) * b;
                    const double var =
                        p * (a - mean) * (a - mean) + (1 - p) * (b - mean) * (b - mean);
                    if (std::abs(mean) > 1.0 || var > 1.0) continue;
                    const double clipped_mean = p * clip(a, V) + (1 - p) * clip(b, V);
                    CHECK(std::abs(clipped_mean - mean) <= 1.0 / V + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("sampling is deterministic under a fixed seed") {
    std::vector<double> x = {0.2, -0.7, 0.4};
    Rng r1(99), r2(99);
    L2Sampler s;
    s.assign(x);
    for (int k = 0; k < 200; ++k) {
        auto a = s.sample(r1), b = s.sample(r2);
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        CHECK(a->j == b->j);
        CHECK(a->inv_coord == b->inv_coord);
    }
}

TEST_CASE("estimate_dot_row reads entries through the counter") {
    DataMatrix m = make_matrix({{0.6, 0.8}});
    std::vector<double> u = {0.6, 0.8};
    Rng rng(15);
    AccessCounter c;
    double v = estimate_dot_row(m, 0, u, 0.2, 0.1, rng, c);
    CHECK(v == doctest::Approx(1.0).epsilon(0.25));
    CHECK(c.entries_read > 0);
}

}  // TEST_SUITE
