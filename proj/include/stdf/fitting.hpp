// Weighted least squares fitting of parametric stdf families to pilot
// estimates, plus the small derivative-free optimizers it relies on.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stdf/estimators.hpp"
#include "stdf/matrix.hpp"

namespace stdf {

class StdfFamily {
public:
    virtual ~StdfFamily() = default;
    virtual std::string name() const = 0;
    virtual std::size_t n_params() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<std::string> param_names() const = 0;
    // Default box bounds (lower, upper) for each parameter.
    virtual std::pair<std::vector<double>, std::vector<double>> default_bounds() const = 0;
    virtual double value(std::span<const double> theta, std::span<const double> x) const = 0;
};

// ell(x) = (x1^(1/theta) + x2^(1/theta))^theta, one parameter.
class LogisticFamily final : public StdfFamily {
public:
    std::string name() const override { return "logistic"; }
    std::size_t n_params() const override { return 1; }
    std::size_t dim() const override { return 2; }
    std::vector<std::string> param_names() const override { return {"theta"}; }
    std::pair<std::vector<double>, std::vector<double>> default_bounds() const override;
    double value(std::span<const double> theta, std::span<const double> x) const override;
};

// Pairwise Brown-Resnick family on fixed sites, parameters (alpha, rho) of
// the variogram (|h|/rho)^alpha. Evaluation points must be two-hot vectors
// (exactly two positive coordinates); the value is the bivariate
// Hüsler-Reiss stdf for that site pair.
class BrownResnickPairwiseFamily final : public StdfFamily {
public:
    explicit BrownResnickPairwiseFamily(std::vector<std::array<double, 2>> sites);
    std::string name() const override { return "brown_resnick"; }
    std::size_t n_params() const override { return 2; }
    std::size_t dim() const override { return sites_.size(); }
    std::vector<std::string> param_names() const override { return {"alpha", "rho"}; }
    std::pair<std::vector<double>, std::vector<double>> default_bounds() const override;
    double value(std::span<const double> theta, std::span<const double> x) const override;

private:
    std::vector<std::array<double, 2>> sites_;
};

std::unique_ptr<StdfFamily> make_family(const std::string& name,
                                        const std::vector<std::array<double, 2>>& sites = {});

struct FitConfig {
    DataMatrix points;                 // q x d evaluation points
    std::vector<double> lower, upper;  // box bounds; empty = family defaults
    std::vector<double> omega;         // q x q SPD weight matrix; empty = identity
    double tol = 1e-9;                 // parameter tolerance
    int coarse_points = 64;           // 1-d prescan size / lattice side is 5 for p >= 2
    int restarts = 5;                  // Nelder-Mead restarts (p >= 2)
    int max_iter = 2000;
};

struct FitResult {
    std::vector<double> theta;
    double objective = 0.0;
    bool converged = false;
    int clamped_pilot = 0;  // pilot values clamped into [0, sum_j c_rj]
    int evaluations = 0;
};

// Minimizes sum_rs {ell_theta(c_r) - pilot_r} Omega_rs {ell_theta(c_s) - pilot_s}
// over the box. Pilot values outside [0, sum_j c_rj] are clamped (counted in
// the result). p = 1 uses a coarse scan plus golden section; p >= 2 a coarse
// lattice plus restarted Nelder-Mead with reflecting box bounds.
FitResult wls_fit(const StdfFamily& family, std::span<const double> pilot, const FitConfig& cfg);

// Convenience: pilot values from a rank-based estimator at cfg.points.
FitResult wls_fit_from_ranks(const StdfFamily& family, const RankMatrix& r, double k,
                             StdfFlavor pilot_flavor, const FitConfig& cfg, double offset = 0.5);

// Golden-section minimization on [lo, hi]; tol is on the argument.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int max_iter = 200);

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int evaluations = 0;
};

// Nelder-Mead with box constraints handled by reflecting proposals back
// inside the box. Converges when the simplex diameter falls below tol.
NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& f,
                                      std::span<const double> x0, std::span<const double> lo,
                                      std::span<const double> hi, double tol, int max_iter = 2000);

}  // namespace stdf
