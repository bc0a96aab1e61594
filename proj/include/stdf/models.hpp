// Max-stable model specifications, exact samplers, and the true stable tail
// dependence functions (closed forms where they exist, a Monte Carlo spectral
// oracle for Brown-Resnick).
//
// Output scales: logistic and clayton emit copula-scale uniforms; max-linear
// and brown_resnick emit unit Fréchet margins. The rank-based estimators are
// invariant to the choice.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stdf/matrix.hpp"
#include "stdf/rng.hpp"

namespace stdf {

// Symmetric logistic (Gumbel) dependence: ell(x) = (sum_j x_j^(1/theta))^theta,
// theta in (0, 1]; theta = 1 is independence, theta -> 0 complete dependence.
struct LogisticModel {
    double theta = 0.7;
    std::size_t d = 2;
};

// X_j = max_t A_jt Z_t with unit Fréchet factors Z_t; coefficients is the
// d x t matrix A with nonnegative entries and unit row sums (unit Fréchet
// margins enforced at validation).
struct MaxLinearModel {
    DataMatrix coefficients;
};

// Brown-Resnick field observed at planar sites with variogram
// gamma(h) = (|h| / rho)^alpha, rho > 0, alpha in (0, 2].
struct BrownResnickModel {
    std::vector<std::array<double, 2>> sites;
    double rho = 1.0;
    double alpha = 1.0;
};

// Bivariate Clayton copula, theta > 0. Not max-stable; used for the lower
// tail copula studies.
struct ClaytonModel {
    double theta = 0.5;
};

using ModelSpec = std::variant<LogisticModel, MaxLinearModel, BrownResnickModel, ClaytonModel>;

void validate_model(const ModelSpec& m);
std::size_t model_dim(const ModelSpec& m);
std::string model_name(const ModelSpec& m);

// Variogram of a BrownResnickModel evaluated at a displacement.
double br_variogram(const BrownResnickModel& m, double dx, double dy);

// Closed-form true stdf. Throws std::invalid_argument for brown_resnick
// (use BrSpectralEnsemble / br_stdf_oracle) and for clayton (not max-stable;
// use clayton_lower_tail_copula).
double true_stdf(const ModelSpec& m, std::span<const double> x);

// Bivariate Hüsler-Reiss stdf with pair variogram gamma:
//   x1 Phi(a/2 + log(x1/x2)/a) + x2 Phi(a/2 + log(x2/x1)/a),  a = sqrt(2 gamma).
// gamma = 0 degenerates to max(x1, x2). Exact pairwise margin of the
// Brown-Resnick model.
double hr_pairwise_stdf(double gamma, double x1, double x2);

double clayton_copula(double theta, double u1, double u2);
// Lower tail copula of the Clayton copula: (x1^-theta + x2^-theta)^(-1/theta).
double clayton_lower_tail_copula(double theta, double x1, double x2);

// Cholesky factor of a symmetric positive semidefinite matrix (row-major,
// d x d), zero-variance pivots clamped to zero columns. Throws on a pivot
// below -tol * max_diag.
std::vector<double> cholesky_psd(const std::vector<double>& a, std::size_t d, double tol = 1e-10);

// Reusable sampler; per-model precomputation (Cholesky factors, variogram
// tables) happens once. Thread-safe for concurrent const use with distinct
// streams.
class ModelSampler {
public:
    explicit ModelSampler(ModelSpec m);

    std::size_t dim() const { return dim_; }
    const ModelSpec& spec() const { return spec_; }

    void sample_row(RngStream& rng, double* out) const;
    void sample(std::size_t n, RngStream& rng, DataMatrix& out) const;
    DataMatrix sample(std::size_t n, RngStream& rng) const;

    // Max-linear only: also returns the latent factor draws (n x t), so the
    // defining identity X_j = max_t A_jt Z_t can be checked externally.
    DataMatrix sample_with_factors(std::size_t n, RngStream& rng, DataMatrix& factors_out) const;

private:
    ModelSpec spec_;
    std::size_t dim_ = 0;
    // brown_resnick precomputation
    std::vector<double> chol_;       // d x d lower factor of Cov(eps0)
    std::vector<double> gamma_mat_;  // d x d pair variogram
    std::vector<double> gamma_origin_;
    void br_row(RngStream& rng, double* out) const;
    void maxlinear_row(RngStream& rng, double* out, double* factors) const;
};

DataMatrix sample(const ModelSpec& m, std::size_t n, RngStream& rng);

struct OracleValue {
    double value = 0.0;
    double se = 0.0;  // Monte Carlo standard error of value
};

// Monte Carlo stdf oracle for Brown-Resnick: one shared spectral ensemble
// W = exp(eps0(s) - gamma(s)) of mc draws, evaluated as mean of
// max_j x_j W_j. Deterministic given (model, mc, stream); evaluation order
// is independent of threading.
class BrSpectralEnsemble {
public:
    BrSpectralEnsemble(const BrownResnickModel& m, std::size_t mc, RngStream& rng);

    OracleValue stdf(std::span<const double> x) const;
    std::size_t draws() const { return mc_; }
    std::size_t dim() const { return d_; }

private:
    std::size_t mc_ = 0;
    std::size_t d_ = 0;
    std::vector<double> w_;  // mc x d
};

OracleValue br_stdf_oracle(const BrownResnickModel& m, std::span<const double> x,
                           std::size_t mc, RngStream& rng);

}  // namespace stdf
