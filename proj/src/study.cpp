#include "stdf/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "stdf/csv.hpp"
#include "stdf/fitting.hpp"
#include "stdf/model_json.hpp"
#include "stdf/numerics.hpp"
#include "stdf/parallel.hpp"
#include "stdf/ranks.hpp"

namespace stdf {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("STDF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return int(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

std::string study_mode_name(StudyMode m) {
    switch (m) {
        case StudyMode::IntegratedError: return "integrated_error";
        case StudyMode::WlsRmse: return "wls_rmse";
        case StudyMode::BootstrapTable: return "bootstrap_table";
    }
    return "?";
}

StudyMode study_mode_from_name(const std::string& s) {
    if (s == "integrated_error") return StudyMode::IntegratedError;
    if (s == "wls_rmse") return StudyMode::WlsRmse;
    if (s == "bootstrap_table") return StudyMode::BootstrapTable;
    throw std::invalid_argument("unknown study mode '" + s + "'");
}

std::string flavor_name(StdfFlavor f) {
    return f == StdfFlavor::Beta ? "beta" : "empirical";
}

const StudyRow* StudyResult::find(const std::string& estimator, double k,
                                  const std::string& metric) const {
    for (const auto& r : rows)
        if (r.estimator == estimator && r.k == k && r.metric == metric) return &r;
    return nullptr;
}

double StudyResult::value_of(const std::string& estimator, double k,
                             const std::string& metric) const {
    const StudyRow* r = find(estimator, k, metric);
    if (!r) throw std::out_of_range("study result row not found: " + estimator + "/" + metric);
    return r->value;
}

double StudyResult::se_of(const std::string& estimator, double k, const std::string& metric) const {
    const StudyRow* r = find(estimator, k, metric);
    if (!r) throw std::out_of_range("study result row not found: " + estimator + "/" + metric);
    return r->se;
}

namespace {

void draw_u_point(RngStream& rng, std::size_t d, std::vector<double>& u) {
    u.resize(d);
    for (std::size_t j = 0; j < d; ++j) u[j] = rng.uniform01();
}

RankMatrix sample_ranks(const ModelSampler& sampler, std::size_t n, RngStream& rng, int& redraws,
                        DataMatrix& scratch) {
    for (;;) {
        sampler.sample(n, rng, scratch);
        try {
            return column_ranks(scratch);
        } catch (const TiesDetected&) {
            ++redraws;  // float collision in a continuous model: redraw
        }
    }
}

void validate_common(const StudyConfig& cfg) {
    validate_model(cfg.model);
    if (cfg.n < 2) throw std::invalid_argument("study: n must be at least 2");
    if (cfg.k_values.empty()) throw std::invalid_argument("study: no k values");
    for (double k : cfg.k_values)
        if (!(k > 0.0) || k > double(cfg.n))
            throw std::invalid_argument("study: every k must lie in (0, n]");
    if (cfg.replications < 2) throw std::invalid_argument("study: need at least 2 replications");
    if (cfg.estimator_flavors.empty()) throw std::invalid_argument("study: no estimator flavors");
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string oracle_key(const ModelSpec& model, const OracleConfig& oc,
                       std::span<const double> x) {
    std::string s = model_canonical_string(model);
    s += "|mc=" + std::to_string(oc.mc) + "|seed=" + std::to_string(oc.seed) + "|x=";
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j) s += ',';
        s += format_double(x[j]);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return std::string(buf);
}

bool oracle_cache_load(const std::string& dir, const std::string& key, OracleValue& out) {
    if (dir.empty()) return false;
    const std::filesystem::path p = std::filesystem::path(dir) / (key + ".json");
    std::ifstream in(p);
    if (!in) return false;
    nlohmann::json j;
    in >> j;
    out.value = j.at("value").get<double>();
    out.se = j.at("se").get<double>();
    return true;
}

void oracle_cache_store(const std::string& dir, const std::string& key, const ModelSpec& model,
                        const OracleConfig& oc, std::span<const double> x, const OracleValue& v) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["model"] = model_to_json(model);
    j["mc"] = oc.mc;
    j["seed"] = oc.seed;
    j["x"] = std::vector<double>(x.begin(), x.end());
    j["value"] = v.value;
    j["se"] = v.se;
    const std::filesystem::path p = std::filesystem::path(dir) / (key + ".json");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write oracle cache file: " + p.string());
    out << j.dump(2) << '\n';
}

// The U points of the integrated-error study, regenerated exactly as the
// replicate loop will draw them.
std::vector<std::vector<double>> study_u_points(const StudyConfig& cfg) {
    const std::size_t d = model_dim(cfg.model);
    std::vector<std::vector<double>> pts(std::size_t(cfg.replications));
    for (std::size_t r = 0; r < pts.size(); ++r) {
        RngStream stream(cfg.seed, r);
        draw_u_point(stream, d, pts[r]);
    }
    return pts;
}

// True stdf at the study's U points for a Brown-Resnick model, via the cache
// plus one shared spectral ensemble for any misses.
std::vector<double> br_truth_values(const StudyConfig& cfg, std::size_t* computed_out) {
    const auto* br = std::get_if<BrownResnickModel>(&cfg.model);
    if (!br) throw std::logic_error("br_truth_values: not a brown_resnick model");
    if (!cfg.oracle)
        throw std::invalid_argument(
            "brown_resnick integrated-error study requires an 'oracle' config block "
            "({\"mc\", \"seed\", \"cache_dir\"}) to precompute the true stdf; add the block "
            "(optionally run `stdf study --precompute-oracle` first to fill the cache)");
    const OracleConfig& oc = *cfg.oracle;
    if (oc.mc < 1000)
        throw std::invalid_argument("oracle: mc must be at least 1000 for a usable truth value");

    const auto pts = study_u_points(cfg);
    std::vector<double> values(pts.size());
    std::vector<std::size_t> missing;
    for (std::size_t r = 0; r < pts.size(); ++r) {
        OracleValue v;
        if (oracle_cache_load(oc.cache_dir, oracle_key(cfg.model, oc, pts[r]), v))
            values[r] = v.value;
        else
            missing.push_back(r);
    }
    if (!missing.empty()) {
        RngStream ens_rng(oc.seed, 0);
        BrSpectralEnsemble ensemble(*br, oc.mc, ens_rng);
        std::vector<OracleValue> fresh(missing.size());
        parallel_for(missing.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
            fresh[i] = ensemble.stdf(pts[missing[i]]);
        });
        for (std::size_t i = 0; i < missing.size(); ++i) {
            const std::size_t r = missing[i];
            values[r] = fresh[i].value;
            oracle_cache_store(oc.cache_dir, oracle_key(cfg.model, oc, pts[r]), cfg.model, oc,
                               pts[r], fresh[i]);
        }
    }
    if (computed_out) *computed_out = missing.size();
    return values;
}

struct SummaryStat {
    double mean = 0.0;
    double se = 0.0;
};

SummaryStat summarize(std::span<const double> v) {
    SummaryStat s;
    s.mean = mean(v);
    s.se = std::sqrt(sample_variance(v) / double(v.size()));
    return s;
}

}  // namespace

std::size_t precompute_oracle(const StudyConfig& cfg) {
    if (cfg.mode != StudyMode::IntegratedError ||
        !std::holds_alternative<BrownResnickModel>(cfg.model))
        return 0;
    validate_common(cfg);
    std::size_t computed = 0;
    br_truth_values(cfg, &computed);
    return computed;
}

StudyResult run_integrated_error_study(const StudyConfig& cfg, const ReplicateEvaluator& eval) {
    validate_common(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t R = std::size_t(cfg.replications);
    const std::size_t d = model_dim(cfg.model);
    const std::size_t F = cfg.estimator_flavors.size();
    const std::size_t K = cfg.k_values.size();

    const bool is_br = std::holds_alternative<BrownResnickModel>(cfg.model);
    std::vector<double> br_truth;
    if (is_br) br_truth = br_truth_values(cfg, nullptr);

    const ModelSampler sampler(cfg.model);

    // errs[r] holds (eA, eB) for every (flavor, k).
    std::vector<std::vector<double>> errs(R, std::vector<double>(F * K * 2));
    std::vector<int> redraw_slots(R, 0);

    parallel_for(R, resolve_threads(cfg.threads), [&](std::size_t r) {
        RngStream stream(cfg.seed, r);
        std::vector<double> u;
        draw_u_point(stream, d, u);
        const double truth = is_br ? br_truth[r] : true_stdf(cfg.model, u);

        DataMatrix scratch;
        const RankMatrix ra = sample_ranks(sampler, cfg.n, stream, redraw_slots[r], scratch);
        const RankMatrix rb = sample_ranks(sampler, cfg.n, stream, redraw_slots[r], scratch);

        auto& slot = errs[r];
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t ki = 0; ki < K; ++ki) {
                const double k = cfg.k_values[ki];
                slot[(f * K + ki) * 2 + 0] = eval(ra, k, u, cfg.estimator_flavors[f]) - truth;
                slot[(f * K + ki) * 2 + 1] = eval(rb, k, u, cfg.estimator_flavors[f]) - truth;
            }
    });

    StudyResult res;
    res.mode = StudyMode::IntegratedError;
    for (int c : redraw_slots) res.tie_redraws += c;

    // Per replicate: mse_r = (e1^2 + e2^2)/2, bias2_r = e1 e2,
    // var_r = (e1 - e2)^2 / 2; the three satisfy mse = bias2 + var exactly.
    std::vector<double> buf(R);
    auto stat_arrays = [&](std::size_t f, std::size_t ki, auto&& fn) {
        for (std::size_t r = 0; r < R; ++r) {
            const double e1 = errs[r][(f * K + ki) * 2 + 0];
            const double e2 = errs[r][(f * K + ki) * 2 + 1];
            buf[r] = fn(e1, e2);
        }
        return summarize(buf);
    };
    const auto mse_fn = [](double a, double b) { return 0.5 * (a * a + b * b); };
    const auto bias2_fn = [](double a, double b) { return a * b; };
    const auto var_fn = [](double a, double b) { return 0.5 * (a - b) * (a - b); };

    for (std::size_t f = 0; f < F; ++f) {
        const std::string name = flavor_name(cfg.estimator_flavors[f]);
        for (std::size_t ki = 0; ki < K; ++ki) {
            const double k = cfg.k_values[ki];
            const auto mse = stat_arrays(f, ki, mse_fn);
            const auto bias2 = stat_arrays(f, ki, bias2_fn);
            const auto var = stat_arrays(f, ki, var_fn);
            res.rows.push_back({name, k, "integrated_mse", mse.mean, mse.se});
            res.rows.push_back({name, k, "integrated_bias2", bias2.mean, bias2.se});
            res.rows.push_back({name, k, "integrated_variance", var.mean, var.se});
        }
    }

    // Paired differences beta - empirical (same replicates, so the SEs
    // support separation statements directly).
    std::ptrdiff_t fb = -1, fe = -1;
    for (std::size_t f = 0; f < F; ++f) {
        if (cfg.estimator_flavors[f] == StdfFlavor::Beta) fb = std::ptrdiff_t(f);
        if (cfg.estimator_flavors[f] == StdfFlavor::Empirical) fe = std::ptrdiff_t(f);
    }
    if (fb >= 0 && fe >= 0) {
        auto diff_stat = [&](std::size_t ki, auto&& fn) {
            for (std::size_t r = 0; r < R; ++r) {
                const double* sl = errs[r].data();
                const double b1 = sl[(std::size_t(fb) * K + ki) * 2 + 0];
                const double b2 = sl[(std::size_t(fb) * K + ki) * 2 + 1];
                const double e1 = sl[(std::size_t(fe) * K + ki) * 2 + 0];
                const double e2 = sl[(std::size_t(fe) * K + ki) * 2 + 1];
                buf[r] = fn(b1, b2) - fn(e1, e2);
            }
            return summarize(buf);
        };
        for (std::size_t ki = 0; ki < K; ++ki) {
            const double k = cfg.k_values[ki];
            const auto dm = diff_stat(ki, mse_fn);
            const auto db = diff_stat(ki, bias2_fn);
            const auto dv = diff_stat(ki, var_fn);
            res.rows.push_back({"beta_minus_empirical", k, "integrated_mse_diff", dm.mean, dm.se});
            res.rows.push_back({"beta_minus_empirical", k, "integrated_bias2_diff", db.mean, db.se});
            res.rows.push_back({"beta_minus_empirical", k, "integrated_variance_diff", dv.mean, dv.se});
        }
    }

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

StudyResult run_wls_rmse_study(const StudyConfig& cfg) {
    validate_common(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    if (!cfg.fit) throw std::invalid_argument("wls_rmse study requires a 'fit' config block");
    const FitStudyConfig& fc = *cfg.fit;

    std::vector<std::array<double, 2>> sites;
    if (fc.family == "brown_resnick") {
        const auto* br = std::get_if<BrownResnickModel>(&cfg.model);
        if (!br)
            throw std::invalid_argument("wls_rmse: brown_resnick family needs a brown_resnick model");
        sites = br->sites;
    }
    const auto family = make_family(fc.family, sites);
    const std::size_t p = family->n_params();
    if (fc.true_params.size() != p)
        throw std::invalid_argument("wls_rmse: true_params length does not match the family");
    if (fc.points.rows == 0 || fc.points.cols != family->dim())
        throw std::invalid_argument("wls_rmse: fit points do not match the family dimension");

    FitConfig fit_cfg;
    fit_cfg.points = fc.points;
    fit_cfg.lower = fc.lower;
    fit_cfg.upper = fc.upper;

    const std::size_t R = std::size_t(cfg.replications);
    const std::size_t F = cfg.estimator_flavors.size();
    const std::size_t K = cfg.k_values.size();
    const ModelSampler sampler(cfg.model);

    std::vector<std::vector<double>> params(R, std::vector<double>(F * K * p));
    std::vector<std::vector<char>> conv(R, std::vector<char>(F * K));
    std::vector<int> redraw_slots(R, 0);

    parallel_for(R, resolve_threads(cfg.threads), [&](std::size_t r) {
        RngStream stream(cfg.seed, r);
        DataMatrix scratch;
        const RankMatrix ranks = sample_ranks(sampler, cfg.n, stream, redraw_slots[r], scratch);
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t ki = 0; ki < K; ++ki) {
                const auto fit = wls_fit_from_ranks(*family, ranks, cfg.k_values[ki],
                                                    cfg.estimator_flavors[f], fit_cfg, cfg.offset);
                for (std::size_t t = 0; t < p; ++t)
                    params[r][(f * K + ki) * p + t] = fit.theta[t];
                conv[r][f * K + ki] = fit.converged ? 1 : 0;
            }
    });

    StudyResult res;
    res.mode = StudyMode::WlsRmse;
    for (int c : redraw_slots) res.tie_redraws += c;

    const auto names = family->param_names();
    std::vector<double> buf(R);
    for (std::size_t f = 0; f < F; ++f) {
        const std::string flavor = flavor_name(cfg.estimator_flavors[f]);
        for (std::size_t ki = 0; ki < K; ++ki) {
            const double k = cfg.k_values[ki];
            int nonconv = 0;
            for (std::size_t r = 0; r < R; ++r) nonconv += conv[r][f * K + ki] ? 0 : 1;
            res.rows.push_back({flavor, k, "nonconverged", double(nonconv), 0.0});
            for (std::size_t t = 0; t < p; ++t) {
                for (std::size_t r = 0; r < R; ++r) buf[r] = params[r][(f * K + ki) * p + t];
                const auto mn = summarize(buf);
                res.rows.push_back({flavor, k, "mean_" + names[t], mn.mean, mn.se});
                for (std::size_t r = 0; r < R; ++r) {
                    const double dtheta = params[r][(f * K + ki) * p + t] - fc.true_params[t];
                    buf[r] = dtheta * dtheta;
                }
                const auto msq = summarize(buf);
                const double rmse = std::sqrt(msq.mean);
                // delta method: se(rmse) = se(mse) / (2 rmse)
                const double se_rmse = rmse > 0.0 ? msq.se / (2.0 * rmse) : 0.0;
                res.rows.push_back({flavor, k, "rmse_" + names[t], rmse, se_rmse});
                res.rows.push_back({flavor, k, "mse_" + names[t], msq.mean, msq.se});
            }
        }
    }

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

StudyResult run_bootstrap_table_study(const StudyConfig& cfg) {
    validate_common(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    if (!cfg.bootstrap) throw std::invalid_argument("bootstrap_table study requires a 'bootstrap' config block");
    const BootstrapStudyConfig& bc = *cfg.bootstrap;
    if (model_dim(cfg.model) != 2)
        throw std::invalid_argument("bootstrap_table study requires a bivariate model");
    if (cfg.k_values.size() != 1)
        throw std::invalid_argument("bootstrap_table study uses a single k");
    if (bc.points.rows == 0 || bc.points.cols != 2)
        throw std::invalid_argument("bootstrap_table: points must be q x 2");
    if (bc.replications_inner < 2 || bc.num_samples < 2)
        throw std::invalid_argument("bootstrap_table: need at least 2 samples and 2 inner replicates");
    if (bc.methods.empty()) throw std::invalid_argument("bootstrap_table: no methods");
    if (bc.reference_csv.empty())
        throw std::invalid_argument(
            "bootstrap_table: reference_csv (true covariance matrix) is required for the MSE baseline");

    const std::size_t q = bc.points.rows;
    const Csv ref = read_csv(bc.reference_csv, false);
    if (ref.values.rows != q || ref.values.cols != q)
        throw std::invalid_argument("bootstrap_table: reference matrix must be q x q");

    const double k = cfg.k_values[0];
    const std::size_t S = std::size_t(bc.num_samples);
    const std::size_t M = bc.methods.size();
    const ModelSampler sampler(cfg.model);

    std::vector<std::vector<double>> covs(S, std::vector<double>(M * q * q));
    std::vector<int> redraw_slots(S, 0), mult_redraw_slots(S, 0);

    parallel_for(S, resolve_threads(cfg.threads), [&](std::size_t s) {
        RngStream stream(cfg.seed, s);
        DataMatrix data;
        RankMatrix ranks;
        for (;;) {
            sampler.sample(cfg.n, stream, data);
            try {
                ranks = column_ranks(data);
                break;
            } catch (const TiesDetected&) {
                ++redraw_slots[s];
            }
        }
        for (std::size_t m = 0; m < M; ++m) {
            CovarianceEstimate est;
            if (bc.methods[m] == BootstrapMethod::Beta)
                est = beta_bootstrap_covariance(ranks, k, bc.points, bc.replications_inner, stream);
            else
                est = multiplier_bootstrap_covariance(data, k, bc.points, bc.replications_inner,
                                                      stream);
            mult_redraw_slots[s] += est.redraws;
            std::copy(est.cov.begin(), est.cov.end(), covs[s].begin() + std::ptrdiff_t(m * q * q));
        }
    });

    StudyResult res;
    res.mode = StudyMode::BootstrapTable;
    for (int c : redraw_slots) res.tie_redraws += c;
    for (int c : mult_redraw_slots) res.multiplier_redraws += c;

    std::vector<double> buf(S);
    for (std::size_t m = 0; m < M; ++m) {
        const std::string name = bc.methods[m] == BootstrapMethod::Beta ? "beta_bootstrap"
                                                                        : "multiplier_bootstrap";
        for (std::size_t a = 0; a < q; ++a)
            for (std::size_t b = a; b < q; ++b) {
                const std::string suffix = "_" + std::to_string(a + 1) + "_" + std::to_string(b + 1);
                for (std::size_t s = 0; s < S; ++s) buf[s] = covs[s][m * q * q + a * q + b];
                const auto avg = summarize(buf);
                res.rows.push_back({name, k, "avg_cov" + suffix, avg.mean, avg.se});
                const double truth = ref.values(a, b);
                for (std::size_t s = 0; s < S; ++s) {
                    const double dcov = covs[s][m * q * q + a * q + b] - truth;
                    buf[s] = dcov * dcov;
                }
                const auto mse = summarize(buf);
                res.rows.push_back({name, k, "mse_cov" + suffix, mse.mean, mse.se});
            }
    }

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg) {
    switch (cfg.mode) {
        case StudyMode::IntegratedError:
            return run_integrated_error_study(
                cfg, [&cfg](const RankMatrix& r, double k, std::span<const double> u,
                            StdfFlavor flavor) {
                    return flavor == StdfFlavor::Beta ? empirical_beta_stdf(r, k, u)
                                                      : empirical_stdf(r, k, u, cfg.offset);
                });
        case StudyMode::WlsRmse: return run_wls_rmse_study(cfg);
        case StudyMode::BootstrapTable: return run_bootstrap_table_study(cfg);
    }
    throw std::logic_error("run_study: unknown mode");
}

void write_study_csv(const StudyResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write study CSV: " + path);
    out << "mode,estimator,k,metric,value,stderr\n";
    const std::string mode = study_mode_name(result.mode);
    for (const auto& r : result.rows)
        out << mode << ',' << r.estimator << ',' << format_double(r.k) << ',' << r.metric << ','
            << format_double(r.value) << ',' << format_double(r.se) << '\n';
    if (!out) throw std::runtime_error("write failure on study CSV: " + path);
}

}  // namespace stdf
