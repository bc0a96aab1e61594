// Nonparametric estimators built on column ranks: the empirical copula, its
// beta-smoothed version, the derived stable tail dependence function (stdf)
// estimators, and the lower tail copula estimators.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stdf/matrix.hpp"

namespace stdf {

enum class StdfFlavor { Empirical, Beta };

// C_n(u) = (1/n) sum_i prod_j 1{R_ij / n <= u_j}, u in [0,1]^d.
double empirical_copula(const RankMatrix& r, std::span<const double> u);

// C_n^beta(u) = (1/n) sum_i prod_j F_{n,R_ij}(u_j), with F_{n,r} the CDF of
// the r-th uniform order statistic. A genuine copula for every n.
double empirical_beta_copula(const RankMatrix& r, std::span<const double> u);

// ell_{n,k}(x) = (1/k) sum_i 1{exists j: R_ij > n + offset - k x_j}. The
// offset in {0, 0.5, 1} absorbs the n vs n+1 threshold conventions; 0.5 is
// the variant used by the simulation studies. Requires (k/n) x_j <= 1.
double empirical_stdf(const RankMatrix& r, double k, std::span<const double> x,
                      double offset = 0.5);

// Beta-smoothed stdf: (n/k) {1 - C_n^beta(1 - (k/n) x)}. No offset variant.
// Satisfies max_j x_j <= value <= sum_j x_j and exact univariate margins.
double empirical_beta_stdf(const RankMatrix& r, double k, std::span<const double> x);

// Exact finite-mixture form of the beta stdf: with T_j ~ Binomial(n, (k/n)x_j)
// independent, the value is E[ell_{n,k}(T/k)] at offset 0, enumerated over the
// full (n+1)^d support. Exponential in d, so guarded to n <= 30 and d <= 3;
// agrees with empirical_beta_stdf to numerical precision (test oracle).
double beta_stdf_mixture_oracle(const RankMatrix& r, double k, std::span<const double> x);

// Lower tail copula estimators (d = 2): Lambda_{n,k}(x) = (n/k) C((k/n) x)
// with C either the empirical or the beta copula. Requires (k/n) x_j <= 1.
double lower_tail_copula(const RankMatrix& r, double k, std::span<const double> x);
double lower_tail_copula_beta(const RankMatrix& r, double k, std::span<const double> x);

// Order-statistic CDF tables at a fixed evaluation point, reusable across
// rank matrices with the same number of rows (bootstrap replicates re-use one
// table set per point).
class BetaCopulaTables {
public:
    BetaCopulaTables(std::size_t n, std::span<const double> u);
    // From the complements: tables at u_j = 1 - c_j without cancellation.
    static BetaCopulaTables from_complements(std::size_t n, std::span<const double> c);

    double copula(const RankMatrix& r) const;  // C_n^beta at the stored point
    std::size_t rows() const { return n_; }
    std::size_t dim() const { return tables_.size(); }

private:
    BetaCopulaTables() = default;
    std::size_t n_ = 0;
    std::vector<std::vector<double>> tables_;
};

// Evaluation grid with the estimator feasibility check (k/n) x_j <= 1.
struct EvalGrid {
    DataMatrix points;  // q x d, nonnegative coordinates
    void validate(std::size_t n, double k) const;
};

}  // namespace stdf
