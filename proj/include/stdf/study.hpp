// Monte Carlo study harness: integrated-error curves for the stdf estimators,
// RMSE curves for the WLS parameter fits, and the bootstrap covariance
// comparison table. All runs are deterministic in (config, seed) and
// byte-stable across thread counts (replicate-indexed streams, preallocated
// slots, fixed-shape pairwise reductions).
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stdf/estimators.hpp"
#include "stdf/matrix.hpp"
#include "stdf/models.hpp"
#include "stdf/resampling.hpp"

namespace stdf {

enum class StudyMode { IntegratedError, WlsRmse, BootstrapTable };

std::string study_mode_name(StudyMode m);
StudyMode study_mode_from_name(const std::string& s);

// Monte Carlo oracle for models without a closed-form stdf (brown_resnick).
struct OracleConfig {
    std::size_t mc = 1'000'000;
    std::uint64_t seed = 1;
    std::string cache_dir;  // empty: in-memory only
};

struct FitStudyConfig {
    std::string family;  // "logistic" or "brown_resnick" (sites from the model)
    DataMatrix points;   // q x d
    std::vector<double> true_params;
    std::vector<double> lower, upper;  // empty = family defaults
};

struct BootstrapStudyConfig {
    int replications_inner = 500;  // B bootstrap replicates per sample
    int num_samples = 1000;        // independent data samples
    DataMatrix points;             // q x 2
    std::vector<BootstrapMethod> methods{BootstrapMethod::Beta, BootstrapMethod::Multiplier};
    std::string reference_csv;     // q x q true covariance (MSE baseline)
};

struct StudyConfig {
    StudyMode mode = StudyMode::IntegratedError;
    ModelSpec model;
    std::size_t n = 1000;
    std::vector<double> k_values;
    int replications = 1000;  // integrated-error: (U, sample pair) triples; wls: samples
    std::vector<StdfFlavor> estimator_flavors{StdfFlavor::Empirical, StdfFlavor::Beta};
    double offset = 0.5;  // empirical-flavor threshold offset
    std::uint64_t seed = 1;
    int threads = 1;
    std::optional<OracleConfig> oracle;
    std::optional<FitStudyConfig> fit;
    std::optional<BootstrapStudyConfig> bootstrap;
};

// Long-format result row; diff rows (estimator = "beta_minus_empirical")
// carry paired per-replicate differences with their own standard errors.
struct StudyRow {
    std::string estimator;
    double k = 0.0;
    std::string metric;
    double value = 0.0;
    double se = 0.0;
};

struct StudyResult {
    StudyMode mode = StudyMode::IntegratedError;
    std::vector<StudyRow> rows;
    int tie_redraws = 0;         // samples redrawn after float rank ties
    int multiplier_redraws = 0;  // all-zero multiplier draws
    double runtime_seconds = 0.0;

    const StudyRow* find(const std::string& estimator, double k, const std::string& metric) const;
    double value_of(const std::string& estimator, double k, const std::string& metric) const;
    double se_of(const std::string& estimator, double k, const std::string& metric) const;
};

std::string flavor_name(StdfFlavor f);

// Integrated-error engine, exposed with an injectable estimator evaluation
// for testing. The production evaluator dispatches on flavor.
using ReplicateEvaluator =
    std::function<double(const RankMatrix&, double k, std::span<const double> u, StdfFlavor)>;

StudyResult run_study(const StudyConfig& cfg);
StudyResult run_integrated_error_study(const StudyConfig& cfg, const ReplicateEvaluator& eval);

// Computes (and caches) any missing oracle values needed by cfg; returns the
// number of points evaluated. Error when cfg needs an oracle but none is
// configured.
std::size_t precompute_oracle(const StudyConfig& cfg);

// CSV (mode,estimator,k,metric,value,stderr) with LF endings and shortest
// round-trip numbers; byte-identical for identical results.
void write_study_csv(const StudyResult& result, const std::string& path);

}  // namespace stdf
