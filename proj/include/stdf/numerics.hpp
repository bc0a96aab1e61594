// Scalar special functions and deterministic summation helpers used by the
// estimators, samplers and study aggregation.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stdf {

// log of the binomial coefficient C(n, s). Cached per n (thread-local).
double lchoose(int n, int s);

// P[Binomial(n, p) = s]. Exact at p = 0 and p = 1 (no 0 * log 0).
double binomial_pmf(int n, double p, int s);

// P[Beta(r, n - r + 1) <= u], the CDF of the r-th order statistic of n iid
// uniforms. r = 0 returns 1 (degenerate at zero).
double beta_order_statistic_cdf(int n, int r, double u);

// F[r] = beta_order_statistic_cdf(n, r, u) for r = 0..n in one O(n) pass
// (mode-anchored binomial recurrence, renormalized so the common scale
// cancels). Callers that know the complement of u exactly should pass it to
// avoid cancellation near u = 1.
std::vector<double> order_statistic_cdf_table(int n, double u, double one_minus_u);
std::vector<double> order_statistic_cdf_table(int n, double u);

// Standard normal CDF via erfc; accurate in both tails.
double standard_normal_cdf(double z);

// Deterministic cascade summation. The reduction tree depends only on the
// length, never on thread count or chunking, so aggregated results are
// byte-stable.
double pairwise_sum(std::span<const double> v);

double mean(std::span<const double> v);

// Unbiased sample variance (divisor n - 1); requires at least two elements.
double sample_variance(std::span<const double> v);

}  // namespace stdf
