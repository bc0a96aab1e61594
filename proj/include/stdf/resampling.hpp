// Bootstrap engines for the lower tail copula: the smoothed (beta-copula)
// bootstrap and the multiplier bootstrap with weighted marginal CDFs.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stdf/matrix.hpp"
#include "stdf/rng.hpp"

namespace stdf {

// One observation from the empirical beta copula: pick a row I uniformly,
// then draw margin j from Beta(R_Ij, n - R_Ij + 1). Margins are exactly
// uniform. Output length = number of columns.
void draw_beta_copula_observation(const RankMatrix& r, RngStream& rng, std::span<double> out);

// n observations from the empirical beta copula, re-ranked into a bootstrap
// rank matrix. Exact floating-point ties trigger a defensive redraw of the
// whole replicate (measure-zero event).
RankMatrix beta_bootstrap_ranks(const RankMatrix& r, RngStream& rng);

// Multiplier law: nonnegative weights with mean 1 and variance 1. The default
// takes values {0, 2} with probability 1/2 each.
struct MultiplierLaw {
    std::vector<double> values{0.0, 2.0};
    std::vector<double> probs{0.5, 0.5};
    void validate() const;
    double draw(RngStream& rng) const;
};

// One multiplier-bootstrap replicate of the lower tail copula at the given
// points (d = 2): draws xi, forms the xi-weighted joint and marginal CDFs,
// and evaluates (n/k) C_n^xi((k/n) x) with C_n^xi the weighted empirical
// copula (marginals plugged through their generalized inverses). An all-zero
// xi draw is redrawn and counted.
struct MultiplierReplicate {
    std::vector<double> values;
    int redraws = 0;
};
MultiplierReplicate multiplier_tail_copula(const DataMatrix& x, double k, const DataMatrix& points,
                                           RngStream& rng, const MultiplierLaw& law = {});

// Precomputes the column sort orders once; replicate() is then O(n) per draw.
class MultiplierEngine {
public:
    explicit MultiplierEngine(const DataMatrix& x);
    std::size_t rows() const { return n_; }

    // out must hold points.rows values. Returns the number of redraws.
    int replicate(double k, const DataMatrix& points, RngStream& rng, const MultiplierLaw& law,
                  std::span<double> out) const;

private:
    std::size_t n_ = 0;
    const DataMatrix* x_ = nullptr;
    std::vector<std::size_t> order_[2];  // ascending sort order per column
};

// Sample covariance (divisor B - 1) of the rows of a B x q replicate matrix;
// returns q x q row-major.
std::vector<double> sample_covariance(const DataMatrix& replicates);

enum class BootstrapMethod { Beta, Multiplier };

struct CovarianceEstimate {
    DataMatrix points;        // q x d evaluation points
    std::vector<double> cov;  // q x q row-major
    int replications = 0;
    int redraws = 0;  // multiplier only: discarded all-zero xi draws
};

// Covariance of the bootstrap statistic over B replicates.
//   beta:       sqrt(k) {Lambda^beta*(x) - Lambda^beta(x)}   (beta centering)
//   multiplier: sqrt(k) {Lambda^xi(x)    - Lambda(x)}        (empirical centering)
CovarianceEstimate beta_bootstrap_covariance(const RankMatrix& r, double k,
                                             const DataMatrix& points, int B, RngStream& rng);
CovarianceEstimate multiplier_bootstrap_covariance(const DataMatrix& x, double k,
                                                   const DataMatrix& points, int B, RngStream& rng,
                                                   const MultiplierLaw& law = {});
// Dispatcher on raw data (the beta path ranks the data first).
CovarianceEstimate bootstrap_covariance(BootstrapMethod method, const DataMatrix& x, double k,
                                        const DataMatrix& points, int B, RngStream& rng);

}  // namespace stdf
