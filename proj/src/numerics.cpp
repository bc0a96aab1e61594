#include "stdf/numerics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace stdf {

namespace {

const std::vector<double>& lchoose_table(int n) {
    thread_local std::unordered_map<int, std::vector<double>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    // lc[s+1] = lc[s] + log((n-s)/(s+1)), accumulated in log space; error
    // stays O(n eps) rather than the O(lgamma(n) eps) of the lgamma route.
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    t[0] = 0.0;
    for (int s = 0; s < n; ++s)
        t[s + 1] = t[s] + std::log(double(n - s)) - std::log(double(s + 1));
    return cache.emplace(n, std::move(t)).first->second;
}

}  // namespace

double lchoose(int n, int s) {
    if (n < 0 || s < 0 || s > n) throw std::domain_error("lchoose: need 0 <= s <= n");
    return lchoose_table(n)[static_cast<std::size_t>(s)];
}

double binomial_pmf(int n, double p, int s) {
    if (n < 0 || s < 0 || s > n) throw std::domain_error("binomial_pmf: need 0 <= s <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial_pmf: p outside [0, 1]");
    if (p == 0.0) return s == 0 ? 1.0 : 0.0;
    if (p == 1.0) return s == n ? 1.0 : 0.0;
    if (s == 0) return std::exp(double(n) * std::log1p(-p));
    if (s == n) return std::exp(double(n) * std::log(p));
    return std::exp(lchoose(n, s) + double(s) * std::log(p) + double(n - s) * std::log1p(-p));
}

double beta_order_statistic_cdf(int n, int r, double u) {
    if (n < 1 || r < 0 || r > n)
        throw std::domain_error("beta_order_statistic_cdf: need 0 <= r <= n, n >= 1");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("beta_order_statistic_cdf: u outside [0, 1]");
    if (r == 0) return 1.0;
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    return boost::math::ibeta(double(r), double(n - r + 1), u);
}

std::vector<double> order_statistic_cdf_table(int n, double u, double one_minus_u) {
    if (n < 1) throw std::domain_error("order_statistic_cdf_table: n >= 1");
    if (!(u >= 0.0 && u <= 1.0) || !(one_minus_u >= 0.0 && one_minus_u <= 1.0))
        throw std::domain_error("order_statistic_cdf_table: u outside [0, 1]");
    if (std::abs((u + one_minus_u) - 1.0) > 1e-9)
        throw std::invalid_argument("order_statistic_cdf_table: inconsistent complement");

    std::vector<double> F(static_cast<std::size_t>(n) + 1);
    F[0] = 1.0;
    if (u == 0.0 || one_minus_u == 1.0) {
        for (int r = 1; r <= n; ++r) F[r] = 0.0;
        return F;
    }
    if (u == 1.0 || one_minus_u == 0.0) {
        for (int r = 1; r <= n; ++r) F[r] = 1.0;
        return F;
    }

    // Unnormalized binomial weights w[s] ~ C(n,s) u^s (1-u)^(n-s), anchored at
    // the mode with w[mode] = 1 and spread by the exact ratio recurrence. The
    // unknown common scale cancels in the normalized tail sums, which keeps
    // the relative error at O(n eps) without any lgamma calls.
    int m = static_cast<int>(std::floor(double(n + 1) * u));
    if (m > n) m = n;
    if (m < 0) m = 0;
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    w[m] = 1.0;
    const double up = u / one_minus_u;
    for (int s = m; s < n; ++s) w[s + 1] = w[s] * up * (double(n - s) / double(s + 1));
    const double down = one_minus_u / u;
    for (int s = m; s > 0; --s) w[s - 1] = w[s] * down * (double(s) / double(n - s + 1));

    // F[r] = P[Binomial(n,u) >= r]; accumulate the upper tail from s = n down
    // so the smallest terms enter first.
    double tail = 0.0;
    std::vector<double> G(static_cast<std::size_t>(n) + 1);
    for (int s = n; s >= 0; --s) {
        tail += w[s];
        G[s] = tail;
    }
    const double total = G[0];
    for (int r = 1; r <= n; ++r) F[r] = G[r] / total;
    return F;
}

std::vector<double> order_statistic_cdf_table(int n, double u) {
    return order_statistic_cdf_table(n, u, 1.0 - u);
}

double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return pairwise_sum(v) / double(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least two values");
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / double(v.size() - 1);
}

}  // namespace stdf
