#include "stdf/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "stdf/numerics.hpp"

namespace stdf {

namespace {

void check_point_dim(const RankMatrix& r, std::span<const double> u, const char* who) {
    if (r.rows == 0 || r.cols == 0) throw std::invalid_argument(std::string(who) + ": empty rank matrix");
    if (u.size() != r.cols)
        throw std::invalid_argument(std::string(who) + ": point dimension does not match rank matrix");
}

void check_unit_cube(std::span<const double> u, const char* who) {
    for (double v : u)
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error(std::string(who) + ": coordinate outside [0, 1]");
}

void check_k(const RankMatrix& r, double k, std::span<const double> x, const char* who) {
    if (!(k > 0.0) || k > double(r.rows))
        throw std::domain_error(std::string(who) + ": k must lie in (0, n]");
    const double n = double(r.rows);
    for (double v : x) {
        if (!(v >= 0.0)) throw std::domain_error(std::string(who) + ": coordinates must be nonnegative");
        if (k / n * v > 1.0)
            throw std::domain_error(std::string(who) + ": (k/n) x_j exceeds 1 (point outside the estimator's range)");
    }
}

}  // namespace

double empirical_copula(const RankMatrix& r, std::span<const double> u) {
    check_point_dim(r, u, "empirical_copula");
    check_unit_cube(u, "empirical_copula");
    const double n = double(r.rows);
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.rows; ++i) {
        bool all = true;
        for (std::size_t j = 0; j < r.cols; ++j) {
            if (!(double(r(i, j)) / n <= u[j])) {
                all = false;
                break;
            }
        }
        count += all;
    }
    return double(count) / n;
}

double empirical_beta_copula(const RankMatrix& r, std::span<const double> u) {
    check_point_dim(r, u, "empirical_beta_copula");
    check_unit_cube(u, "empirical_beta_copula");
    return BetaCopulaTables(r.rows, u).copula(r);
}

double empirical_stdf(const RankMatrix& r, double k, std::span<const double> x, double offset) {
    check_point_dim(r, x, "empirical_stdf");
    check_k(r, k, x, "empirical_stdf");
    if (offset != 0.0 && offset != 0.5 && offset != 1.0)
        throw std::domain_error("empirical_stdf: offset must be 0, 0.5 or 1");
    const double n = double(r.rows);
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.rows; ++i) {
        for (std::size_t j = 0; j < r.cols; ++j) {
            if (double(r(i, j)) > n + offset - k * x[j]) {
                ++count;
                break;
            }
        }
    }
    return double(count) / k;
}

double empirical_beta_stdf(const RankMatrix& r, double k, std::span<const double> x) {
    check_point_dim(r, x, "empirical_beta_stdf");
    check_k(r, k, x, "empirical_beta_stdf");
    const double n = double(r.rows);
    std::vector<double> c(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) c[j] = k / n * x[j];
    const auto tables = BetaCopulaTables::from_complements(r.rows, c);
    return n / k * (1.0 - tables.copula(r));
}

double beta_stdf_mixture_oracle(const RankMatrix& r, double k, std::span<const double> x) {
    check_point_dim(r, x, "beta_stdf_mixture_oracle");
    check_k(r, k, x, "beta_stdf_mixture_oracle");
    if (r.rows > 30 || r.cols > 3)
        throw std::invalid_argument(
            "beta_stdf_mixture_oracle: exhaustive enumeration guarded to n <= 30, d <= 3");
    const int n = int(r.rows);
    const std::size_t d = r.cols;

    std::vector<std::vector<double>> pmf(d, std::vector<double>(std::size_t(n) + 1));
    for (std::size_t j = 0; j < d; ++j)
        for (int t = 0; t <= n; ++t) pmf[j][std::size_t(t)] = binomial_pmf(n, k / double(n) * x[j], t);

    std::vector<int> t(d, 0);
    std::vector<double> point(d);
    double acc = 0.0;
    for (;;) {
        double weight = 1.0;
        for (std::size_t j = 0; j < d; ++j) weight *= pmf[j][std::size_t(t[j])];
        if (weight > 0.0) {
            // The offset-0 indicator compares integer ranks against n - t_j.
            // Evaluating at (t_j - 1/2)/k puts the threshold mid-interval, so
            // the strict comparison (and the k x_j <= n range check) cannot
            // flip on floating-point rounding of t_j / k.
            for (std::size_t j = 0; j < d; ++j)
                point[j] = t[j] == 0 ? 0.0 : (double(t[j]) - 0.5) / k;
            acc += weight * empirical_stdf(r, k, point, 0.0);
        }
        std::size_t j = 0;
        while (j < d && ++t[j] > n) t[j++] = 0;
        if (j == d) break;
    }
    return acc;
}

double lower_tail_copula(const RankMatrix& r, double k, std::span<const double> x) {
    check_point_dim(r, x, "lower_tail_copula");
    if (r.cols != 2) throw std::invalid_argument("lower_tail_copula: defined for d = 2");
    check_k(r, k, x, "lower_tail_copula");
    const double n = double(r.rows);
    const double u[2] = {k / n * x[0], k / n * x[1]};
    return n / k * empirical_copula(r, u);
}

double lower_tail_copula_beta(const RankMatrix& r, double k, std::span<const double> x) {
    check_point_dim(r, x, "lower_tail_copula_beta");
    if (r.cols != 2) throw std::invalid_argument("lower_tail_copula_beta: defined for d = 2");
    check_k(r, k, x, "lower_tail_copula_beta");
    const double n = double(r.rows);
    const double u[2] = {k / n * x[0], k / n * x[1]};
    return n / k * BetaCopulaTables(r.rows, u).copula(r);
}

BetaCopulaTables::BetaCopulaTables(std::size_t n, std::span<const double> u) {
    if (n == 0) throw std::invalid_argument("BetaCopulaTables: n must be positive");
    n_ = n;
    tables_.reserve(u.size());
    for (double v : u) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("BetaCopulaTables: u outside [0, 1]");
        tables_.push_back(order_statistic_cdf_table(int(n), v));
    }
}

BetaCopulaTables BetaCopulaTables::from_complements(std::size_t n, std::span<const double> c) {
    if (n == 0) throw std::invalid_argument("BetaCopulaTables: n must be positive");
    BetaCopulaTables t;
    t.n_ = n;
    t.tables_.reserve(c.size());
    for (double v : c) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("BetaCopulaTables: complement outside [0, 1]");
        t.tables_.push_back(order_statistic_cdf_table(int(n), 1.0 - v, v));
    }
    return t;
}

double BetaCopulaTables::copula(const RankMatrix& r) const {
    if (r.rows != n_ || r.cols != tables_.size())
        throw std::invalid_argument("BetaCopulaTables: rank matrix shape does not match tables");
    double acc = 0.0;
    for (std::size_t i = 0; i < r.rows; ++i) {
        double prod = 1.0;
        for (std::size_t j = 0; j < r.cols; ++j) prod *= tables_[j][std::size_t(r(i, j))];
        acc += prod;
    }
    return acc / double(n_);
}

void EvalGrid::validate(std::size_t n, double k) const {
    if (points.rows == 0 || points.cols == 0)
        throw std::invalid_argument("EvalGrid: empty grid");
    if (!(k > 0.0) || k > double(n)) throw std::domain_error("EvalGrid: k must lie in (0, n]");
    for (std::size_t i = 0; i < points.rows; ++i)
        for (std::size_t j = 0; j < points.cols; ++j) {
            const double v = points(i, j);
            if (!(v >= 0.0)) throw std::domain_error("EvalGrid: coordinates must be nonnegative");
            if (k / double(n) * v > 1.0)
                throw std::domain_error("EvalGrid: (k/n) x_j exceeds 1 at a grid point");
        }
}

}  // namespace stdf
