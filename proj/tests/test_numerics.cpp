#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stdf/numerics.hpp"

using namespace stdf;

TEST_CASE("order statistic cdf: frozen reference values") {
    // F_{n,r}(u) = P[Beta(r, n-r+1) <= u]; references from an independent
    // implementation of the regularized incomplete beta function.
    CHECK(beta_order_statistic_cdf(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(beta_order_statistic_cdf(2, 1, 0.5) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(beta_order_statistic_cdf(5, 3, 0.4) ==
          doctest::Approx(0.31744000000000006).epsilon(1e-13));
    CHECK(beta_order_statistic_cdf(10, 2, 0.15) ==
          doctest::Approx(0.4557001762344726).epsilon(1e-13));
}

TEST_CASE("order statistic cdf: endpoints and degenerate rank") {
    for (int n : {1, 2, 7, 100}) {
        for (int r = 1; r <= n; r += std::max(1, n / 3)) {
            CHECK(beta_order_statistic_cdf(n, r, 0.0) == 0.0);
            CHECK(beta_order_statistic_cdf(n, r, 1.0) == 1.0);
        }
        CHECK(beta_order_statistic_cdf(n, 0, 0.37) == 1.0);
    }
}

TEST_CASE("order statistic cdf: domain errors") {
    CHECK_THROWS_AS(beta_order_statistic_cdf(5, 6, 0.5), std::domain_error);
    CHECK_THROWS_AS(beta_order_statistic_cdf(5, -1, 0.5), std::domain_error);
    CHECK_THROWS_AS(beta_order_statistic_cdf(0, 0, 0.5), std::domain_error);
    CHECK_THROWS_AS(beta_order_statistic_cdf(5, 2, -0.1), std::domain_error);
    CHECK_THROWS_AS(beta_order_statistic_cdf(5, 2, 1.1), std::domain_error);
    CHECK_THROWS_AS(beta_order_statistic_cdf(5, 2, std::nan("")), std::domain_error);
}

TEST_CASE("order statistic cdf: brute-force binomial tail sums, moderate n") {
    // Full n <= 60 sweep lives in the acceptance suite; spot-check here.
    for (int n : {1, 2, 3, 5, 8, 13, 21, 34}) {
        for (int r = 1; r <= n; ++r) {
            for (int g = 0; g <= 20; ++g) {
                const double u = double(g) / 20.0;
                double brute = 0.0;
                for (int s = r; s <= n; ++s) brute += binomial_pmf(n, u, s);
                CHECK(beta_order_statistic_cdf(n, r, u) == doctest::Approx(brute).epsilon(5e-13));
            }
        }
    }
}

TEST_CASE("order statistic cdf: reflection, monotonicity, antitonicity") {
    for (int n : {3, 10, 47}) {
        for (int r = 1; r <= n; ++r) {
            double prev = -1.0;
            for (int g = 0; g <= 40; ++g) {
                const double u = double(g) / 40.0;
                const double f = beta_order_statistic_cdf(n, r, u);
                CHECK(f == doctest::Approx(1.0 - beta_order_statistic_cdf(n, n - r + 1, 1.0 - u))
                               .epsilon(1e-12));
                CHECK(f >= prev - 1e-15);  // nondecreasing in u
                prev = f;
                if (r < n) CHECK(f >= beta_order_statistic_cdf(n, r + 1, u) - 1e-14);
            }
        }
    }
}

TEST_CASE("binomial pmf: frozen values and normalization") {
    CHECK(binomial_pmf(5, 0.0, 0) == 1.0);
    CHECK(binomial_pmf(5, 0.0, 3) == 0.0);
    CHECK(binomial_pmf(5, 1.0, 5) == 1.0);
    CHECK(binomial_pmf(2, 0.5, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(binomial_pmf(4, 0.3, 4) == doctest::Approx(0.0081).epsilon(1e-13));
    for (int n : {1, 7, 50}) {
        for (double p : {0.02, 0.37, 0.5, 0.93}) {
            double s = 0.0;
            for (int t = 0; t <= n; ++t) s += binomial_pmf(n, p, t);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(binomial_pmf(4, 0.5, 5), std::domain_error);
    CHECK_THROWS_AS(binomial_pmf(4, 0.5, -1), std::domain_error);
    CHECK_THROWS_AS(binomial_pmf(4, -0.1, 2), std::domain_error);
    CHECK_THROWS_AS(binomial_pmf(4, 1.5, 2), std::domain_error);
}

TEST_CASE("lchoose") {
    CHECK(lchoose(0, 0) == 0.0);
    CHECK(lchoose(5, 2) == doctest::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(lchoose(60, 30) == doctest::Approx(std::log(118264581564861424.0)).epsilon(1e-12));
    CHECK_THROWS_AS(lchoose(3, 4), std::domain_error);
    CHECK_THROWS_AS(lchoose(-1, 0), std::domain_error);
}

TEST_CASE("standard normal cdf") {
    CHECK(standard_normal_cdf(0.0) == 0.5);
    CHECK(standard_normal_cdf(40.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(standard_normal_cdf(-40.0) < 1e-300);
    CHECK(standard_normal_cdf(0.5) == doctest::Approx(0.6914624612740131).epsilon(1e-14));
    CHECK(2.0 * standard_normal_cdf(std::sqrt(2.0) / 2.0) ==
          doctest::Approx(1.5204998778130467).epsilon(1e-14));
    for (double z : {0.3, 1.0, 2.5, 6.0})
        CHECK(standard_normal_cdf(-z) ==
              doctest::Approx(1.0 - standard_normal_cdf(z)).epsilon(1e-12));
}

TEST_CASE("cdf table agrees with the scalar evaluator") {
    for (int n : {1, 2, 17, 350}) {
        for (double u : {0.001, 0.25, 0.731, 0.999}) {
            const auto F = order_statistic_cdf_table(n, u);
            REQUIRE(F.size() == std::size_t(n) + 1);
            CHECK(F[0] == 1.0);
            for (int r = 1; r <= n; ++r)
                CHECK(F[std::size_t(r)] ==
                      doctest::Approx(beta_order_statistic_cdf(n, r, u)).epsilon(2e-12));
        }
    }
}

TEST_CASE("cdf table margin identity at large n") {
    // sum_{r=1..n} F_{n,r}(u) = n u exactly; the table keeps it to O(n eps),
    // which is what makes the beta-copula margins exact downstream.
    for (int n : {100, 1000, 20000}) {
        for (double u : {0.013, 0.5, 0.87, 0.9999}) {
            const auto F = order_statistic_cdf_table(n, u);
            double s = 0.0;
            for (int r = n; r >= 1; --r) s += F[std::size_t(r)];
            CHECK(s == doctest::Approx(double(n) * u).epsilon(1e-12));
        }
    }
}

TEST_CASE("cdf table with an exact complement avoids cancellation") {
    const int n = 5000;
    const double c = 1e-12;  // u = 1 - c, not representable as 1.0 - c exactly
    const auto F = order_statistic_cdf_table(n, 1.0 - c, c);
    // P[Beta(n, 1) <= 1 - c] = (1 - c)^n ~ 1 - n c: the direct-u route wipes
    // out c entirely, the complement route keeps it.
    CHECK(1.0 - F[std::size_t(n)] == doctest::Approx(double(n) * c).epsilon(1e-6));
    const auto endpoints = order_statistic_cdf_table(n, 0.0, 1.0);
    CHECK(endpoints[1] == 0.0);
    const auto ones = order_statistic_cdf_table(n, 1.0, 0.0);
    CHECK(ones[std::size_t(n)] == 1.0);
    CHECK_THROWS_AS(order_statistic_cdf_table(10, 0.4, 0.7), std::invalid_argument);
}

TEST_CASE("summation helpers") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(pairwise_sum(v) == 10.0);
    CHECK(mean(v) == 2.5);
    std::vector<double> big(1000);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = 1.0 / double(i + 1);
    double naive = 0.0;
    for (double x : big) naive += x;
    CHECK(pairwise_sum(big) == doctest::Approx(naive).epsilon(1e-14));

    std::vector<double> two{-1.0, 1.0};
    CHECK(sample_variance(two) == 2.0);
    std::vector<double> one{3.0};
    CHECK_THROWS_AS(sample_variance(one), std::invalid_argument);
    std::vector<double> none;
    CHECK_THROWS_AS(mean(none), std::invalid_argument);
}
