#include "stdf/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "stdf/csv.hpp"
#include "stdf/estimators.hpp"
#include "stdf/fitting.hpp"
#include "stdf/model_json.hpp"
#include "stdf/models.hpp"
#include "stdf/parallel.hpp"
#include "stdf/ranks.hpp"
#include "stdf/resampling.hpp"
#include "stdf/study.hpp"
#include "stdf/version.hpp"

namespace stdf::cli {

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open JSON file: " + path);
    json j;
    in >> j;
    return j;
}

// Config files are either bare option objects or a manifest from a previous
// run ({"command": ..., "options": {...}}); both round-trip.
json load_config(const std::string& path, const std::string& command) {
    json j = load_json_file(path);
    if (j.is_object() && j.contains("options")) {
        if (j.contains("command") && j.at("command").get<std::string>() != command)
            throw std::invalid_argument("config file " + path + " is a manifest for command '" +
                                        j.at("command").get<std::string>() + "', not '" + command + "'");
        return j.at("options");
    }
    return j;
}

std::string flag_key(std::string flag) {
    while (!flag.empty() && flag.front() == '-') flag.erase(flag.begin());
    for (char& c : flag)
        if (c == '-') c = '_';
    return flag;
}

template <class T>
void merge_opt(const json& cfg, const CLI::App* sub, const std::string& flag, T& target) {
    const std::string key = flag_key(flag);
    if (sub->count(flag) == 0 && cfg.contains(key)) target = cfg.at(key).get<T>();
}

void write_manifest(const std::string& path, const std::string& command, const json& options,
                    double runtime_seconds, const json& extra = json::object()) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["options"] = options;
    m["runtime_seconds"] = runtime_seconds;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << m.dump(2) << '\n';
}

DataMatrix read_points_csv(const std::string& path, bool header) {
    return read_csv(path, header).values;
}

std::vector<std::string> coordinate_header(std::size_t d) {
    std::vector<std::string> h(d);
    for (std::size_t j = 0; j < d; ++j) h[j] = "x" + std::to_string(j + 1);
    return h;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string model = "logistic";
    double theta = 0.7;
    std::vector<double> theta_list;
    double rho = 1.0;
    double alpha = 1.0;
    std::string sites = "unit-square";
    std::string model_json_path;
    std::size_t d = 2;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

std::vector<std::array<double, 2>> parse_sites(const std::string& spec) {
    if (spec == "unit-square") return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    const json j = load_json_file(spec);
    std::vector<std::array<double, 2>> sites;
    for (const auto& s : j) {
        if (!s.is_array() || s.size() != 2)
            throw std::invalid_argument("sites file: each entry must be an [x, y] pair");
        sites.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    return sites;
}

ModelSpec build_model(const SimulateOpts& o) {
    if (!o.model_json_path.empty()) return model_from_json(load_json_file(o.model_json_path));
    if (o.model == "logistic") return LogisticModel{o.theta, o.d};
    if (o.model == "clayton") return ClaytonModel{o.theta};
    if (o.model == "max-linear" || o.model == "max_linear") {
        if (o.theta_list.empty())
            throw std::invalid_argument(
                "max-linear needs --theta-list t1,t2,... (rows become (t_j, 1 - t_j)); "
                "arbitrary coefficient matrices go through --model-json");
        MaxLinearModel ml;
        ml.coefficients = DataMatrix(o.theta_list.size(), 2);
        for (std::size_t j = 0; j < o.theta_list.size(); ++j) {
            const double t = o.theta_list[j];
            if (!(t >= 0.0 && t <= 1.0))
                throw std::invalid_argument("max-linear: every theta must lie in [0, 1]");
            ml.coefficients(j, 0) = t;
            ml.coefficients(j, 1) = 1.0 - t;
        }
        return ml;
    }
    if (o.model == "brown-resnick" || o.model == "brown_resnick") {
        BrownResnickModel br;
        br.sites = parse_sites(o.sites);
        br.rho = o.rho;
        br.alpha = o.alpha;
        return br;
    }
    throw std::invalid_argument("unknown model '" + o.model +
                                "' (logistic, max-linear, brown-resnick, clayton)");
}

json simulate_options_json(const SimulateOpts& o) {
    json j;
    j["model"] = o.model;
    j["theta"] = o.theta;
    if (!o.theta_list.empty()) j["theta_list"] = o.theta_list;
    j["rho"] = o.rho;
    j["alpha"] = o.alpha;
    j["sites"] = o.sites;
    if (!o.model_json_path.empty()) j["model_json"] = o.model_json_path;
    j["d"] = o.d;
    j["n"] = o.n;
    j["seed"] = o.seed;
    j["out"] = o.out;
    return j;
}

void run_simulate(const SimulateOpts& opts, const CLI::App* sub) {
    SimulateOpts o = opts;
    bool seed_in_config = false;
    if (!o.config.empty()) {
        const json cfg = load_config(o.config, "simulate");
        seed_in_config = cfg.contains("seed");
        merge_opt(cfg, sub, "--model", o.model);
        merge_opt(cfg, sub, "--theta", o.theta);
        merge_opt(cfg, sub, "--theta-list", o.theta_list);
        merge_opt(cfg, sub, "--rho", o.rho);
        merge_opt(cfg, sub, "--alpha", o.alpha);
        merge_opt(cfg, sub, "--sites", o.sites);
        merge_opt(cfg, sub, "--model-json", o.model_json_path);
        merge_opt(cfg, sub, "--d", o.d);
        merge_opt(cfg, sub, "--n", o.n);
        merge_opt(cfg, sub, "--seed", o.seed);
        merge_opt(cfg, sub, "--out", o.out);
    }
    if (sub->count("--seed") == 0 && !seed_in_config)
        throw std::invalid_argument("simulate: --seed is required (runs must be reproducible)");
    if (o.out.empty()) throw std::invalid_argument("simulate: --out is required");
    if (o.n == 0) throw std::invalid_argument("simulate: n must be positive");

    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = build_model(o);
    RngStream rng(o.seed, 0);
    const DataMatrix x = sample(model, o.n, rng);
    write_csv(o.out, coordinate_header(x.cols), x);
    json extra;
    extra["model_spec"] = model_to_json(model);
    write_manifest(o.out + ".manifest.json", "simulate", simulate_options_json(o),
                   elapsed_since(t0), extra);
}

// ------------------------------------------------------------------- ranks

struct RanksOpts {
    std::string input;
    std::string out;
    bool no_header = false;
    std::uint64_t jitter_seed = 0;
    bool jitter = false;
    double jitter_scale = 1e-9;
    std::string config;
};

void run_ranks(const RanksOpts& opts, const CLI::App* sub) {
    RanksOpts o = opts;
    if (!o.config.empty()) {
        const json cfg = load_config(o.config, "ranks");
        merge_opt(cfg, sub, "--input", o.input);
        merge_opt(cfg, sub, "--out", o.out);
        merge_opt(cfg, sub, "--no-header", o.no_header);
        merge_opt(cfg, sub, "--jitter-seed", o.jitter_seed);
        merge_opt(cfg, sub, "--jitter", o.jitter);
        merge_opt(cfg, sub, "--jitter-scale", o.jitter_scale);
    }
    if (o.input.empty() || o.out.empty())
        throw std::invalid_argument("ranks: --input and --out are required");

    const auto t0 = std::chrono::steady_clock::now();
    DataMatrix x = read_csv(o.input, !o.no_header).values;
    if (o.jitter) {
        // Documented tie-breaking noise: uniform on (-s, s) with
        // s = jitter_scale * (column max - min), seeded by --jitter-seed.
        RngStream rng(o.jitter_seed, 0);
        for (std::size_t j = 0; j < x.cols; ++j) {
            double lo = x(0, j), hi = x(0, j);
            for (std::size_t i = 1; i < x.rows; ++i) {
                lo = std::min(lo, x(i, j));
                hi = std::max(hi, x(i, j));
            }
            const double s = o.jitter_scale * std::max(hi - lo, 1.0);
            for (std::size_t i = 0; i < x.rows; ++i)
                x(i, j) += s * (2.0 * rng.uniform01() - 1.0);
        }
    }
    RankMatrix r;
    try {
        r = column_ranks(x);
    } catch (const TiesDetected& e) {
        throw TiesDetected(e,
                           "; rerun with --jitter --jitter-seed <s> to break ties with "
                           "documented seeded noise");
    }
    DataMatrix out(r.rows, r.cols);
    for (std::size_t i = 0; i < r.rows; ++i)
        for (std::size_t j = 0; j < r.cols; ++j) out(i, j) = double(r(i, j));
    std::vector<std::string> header(r.cols);
    for (std::size_t j = 0; j < r.cols; ++j) header[j] = "r" + std::to_string(j + 1);
    write_csv(o.out, header, out);
    json options;
    options["input"] = o.input;
    options["out"] = o.out;
    options["no_header"] = o.no_header;
    options["jitter"] = o.jitter;
    options["jitter_seed"] = o.jitter_seed;
    options["jitter_scale"] = o.jitter_scale;
    write_manifest(o.out + ".manifest.json", "ranks", options, elapsed_since(t0));
}

// ---------------------------------------------------------------- estimate

struct EstimateOpts {
    std::string input;
    bool input_is_ranks = false;
    bool no_header = false;
    double k = 0.0;
    std::string estimator = "beta";
    double offset = 0.5;
    std::string grid;
    bool grid_no_header = false;
    std::string out;
    std::string config;
};

RankMatrix ranks_from_input(const DataMatrix& x, bool input_is_ranks) {
    if (!input_is_ranks) return column_ranks(x);
    RankMatrix r(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double v = x(i, j);
            const int iv = int(std::lround(v));
            if (std::abs(v - double(iv)) > 1e-9)
                throw std::invalid_argument("rank input contains a non-integer entry");
            r(i, j) = iv;
        }
    if (!is_valid_rank_matrix(r))
        throw std::invalid_argument("rank input: every column must be a permutation of 1..n");
    return r;
}

void run_estimate(const EstimateOpts& opts, const CLI::App* sub) {
    EstimateOpts o = opts;
    if (!o.config.empty()) {
        const json cfg = load_config(o.config, "estimate");
        merge_opt(cfg, sub, "--input", o.input);
        merge_opt(cfg, sub, "--input-ranks", o.input_is_ranks);
        merge_opt(cfg, sub, "--no-header", o.no_header);
        merge_opt(cfg, sub, "--k", o.k);
        merge_opt(cfg, sub, "--estimator", o.estimator);
        merge_opt(cfg, sub, "--offset", o.offset);
        merge_opt(cfg, sub, "--grid", o.grid);
        merge_opt(cfg, sub, "--grid-no-header", o.grid_no_header);
        merge_opt(cfg, sub, "--out", o.out);
    }
    if (o.input.empty() || o.grid.empty() || o.out.empty())
        throw std::invalid_argument("estimate: --input, --grid and --out are required");
    if (o.estimator != "beta" && o.estimator != "empirical")
        throw std::invalid_argument("estimate: --estimator must be 'beta' or 'empirical'");

    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = read_csv(o.input, !o.no_header).values;
    const RankMatrix r = ranks_from_input(x, o.input_is_ranks);
    EvalGrid grid{read_points_csv(o.grid, !o.grid_no_header)};
    grid.validate(r.rows, o.k);
    if (grid.points.cols != r.cols)
        throw std::invalid_argument("estimate: grid dimension does not match the data");

    DataMatrix out(grid.points.rows, grid.points.cols + 1);
    for (std::size_t i = 0; i < grid.points.rows; ++i) {
        const std::span<const double> pt(grid.points.row(i), grid.points.cols);
        for (std::size_t j = 0; j < grid.points.cols; ++j) out(i, j) = pt[j];
        out(i, grid.points.cols) = o.estimator == "beta"
                                       ? empirical_beta_stdf(r, o.k, pt)
                                       : empirical_stdf(r, o.k, pt, o.offset);
    }
    auto header = coordinate_header(grid.points.cols);
    header.push_back("estimate");
    write_csv(o.out, header, out);

    json options;
    options["input"] = o.input;
    options["input_ranks"] = o.input_is_ranks;
    options["no_header"] = o.no_header;
    options["k"] = o.k;
    options["estimator"] = o.estimator;
    options["offset"] = o.offset;
    options["grid"] = o.grid;
    options["grid_no_header"] = o.grid_no_header;
    options["out"] = o.out;
    write_manifest(o.out + ".manifest.json", "estimate", options, elapsed_since(t0));
}

// --------------------------------------------------------------------- fit

struct FitOpts {
    std::string input;
    bool no_header = false;
    double k = 0.0;
    std::string pilot = "beta";
    double offset = 0.5;
    std::string family = "logistic";
    std::string points;
    bool points_no_header = false;
    std::string sites = "unit-square";
    std::vector<double> lower, upper;
    std::string out;
    std::string config;
};

void run_fit(const FitOpts& opts, const CLI::App* sub) {
    FitOpts o = opts;
    if (!o.config.empty()) {
        const json cfg = load_config(o.config, "fit");
        merge_opt(cfg, sub, "--input", o.input);
        merge_opt(cfg, sub, "--no-header", o.no_header);
        merge_opt(cfg, sub, "--k", o.k);
        merge_opt(cfg, sub, "--pilot", o.pilot);
        merge_opt(cfg, sub, "--offset", o.offset);
        merge_opt(cfg, sub, "--family", o.family);
        merge_opt(cfg, sub, "--points", o.points);
        merge_opt(cfg, sub, "--points-no-header", o.points_no_header);
        merge_opt(cfg, sub, "--sites", o.sites);
        merge_opt(cfg, sub, "--lower", o.lower);
        merge_opt(cfg, sub, "--upper", o.upper);
        merge_opt(cfg, sub, "--out", o.out);
    }
    if (o.input.empty() || o.points.empty() || o.out.empty())
        throw std::invalid_argument("fit: --input, --points and --out are required");
    if (o.pilot != "beta" && o.pilot != "empirical")
        throw std::invalid_argument("fit: --pilot must be 'beta' or 'empirical'");

    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = read_csv(o.input, !o.no_header).values;
    const RankMatrix r = column_ranks(x);

    std::vector<std::array<double, 2>> sites;
    if (o.family == "brown_resnick" || o.family == "brown-resnick") {
        o.family = "brown_resnick";
        sites = parse_sites(o.sites);
    }
    const auto family = make_family(o.family, sites);

    FitConfig fit_cfg;
    fit_cfg.points = read_points_csv(o.points, !o.points_no_header);
    fit_cfg.lower = o.lower;
    fit_cfg.upper = o.upper;
    EvalGrid{fit_cfg.points}.validate(r.rows, o.k);

    const StdfFlavor flavor = o.pilot == "beta" ? StdfFlavor::Beta : StdfFlavor::Empirical;
    const FitResult fit = wls_fit_from_ranks(*family, r, o.k, flavor, fit_cfg, o.offset);

    json result;
    result["family"] = family->name();
    const auto names = family->param_names();
    json params;
    for (std::size_t t = 0; t < names.size(); ++t) params[names[t]] = fit.theta[t];
    result["params"] = params;
    result["objective"] = fit.objective;
    result["converged"] = fit.converged;
    result["clamped_pilot"] = fit.clamped_pilot;
    result["evaluations"] = fit.evaluations;
    std::ofstream outf(o.out, std::ios::binary);
    if (!outf) throw std::runtime_error("cannot write fit result: " + o.out);
    outf << result.dump(2) << '\n';

    json options;
    options["input"] = o.input;
    options["no_header"] = o.no_header;
    options["k"] = o.k;
    options["pilot"] = o.pilot;
    options["offset"] = o.offset;
    options["family"] = o.family;
    options["points"] = o.points;
    options["points_no_header"] = o.points_no_header;
    options["sites"] = o.sites;
    if (!o.lower.empty()) options["lower"] = o.lower;
    if (!o.upper.empty()) options["upper"] = o.upper;
    options["out"] = o.out;
    write_manifest(o.out + ".manifest.json", "fit", options, elapsed_since(t0));
}

// --------------------------------------------------------------- bootstrap

struct BootstrapOpts {
    std::string input;
    bool no_header = false;
    double k = 0.0;
    std::string method = "beta";
    std::string points;
    bool points_no_header = false;
    int replications = 500;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void run_bootstrap(const BootstrapOpts& opts, const CLI::App* sub) {
    BootstrapOpts o = opts;
    bool seed_in_config = false;
    if (!o.config.empty()) {
        const json cfg = load_config(o.config, "bootstrap");
        seed_in_config = cfg.contains("seed");
        merge_opt(cfg, sub, "--input", o.input);
        merge_opt(cfg, sub, "--no-header", o.no_header);
        merge_opt(cfg, sub, "--k", o.k);
        merge_opt(cfg, sub, "--method", o.method);
        merge_opt(cfg, sub, "--points", o.points);
        merge_opt(cfg, sub, "--points-no-header", o.points_no_header);
        merge_opt(cfg, sub, "--replications", o.replications);
        merge_opt(cfg, sub, "--seed", o.seed);
        merge_opt(cfg, sub, "--out", o.out);
    }
    if (sub->count("--seed") == 0 && !seed_in_config)
        throw std::invalid_argument("bootstrap: --seed is required (runs must be reproducible)");
    if (o.input.empty() || o.points.empty() || o.out.empty())
        throw std::invalid_argument("bootstrap: --input, --points and --out are required");
    BootstrapMethod method;
    if (o.method == "beta") method = BootstrapMethod::Beta;
    else if (o.method == "multiplier") method = BootstrapMethod::Multiplier;
    else throw std::invalid_argument("bootstrap: --method must be 'beta' or 'multiplier'");

    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix x = read_csv(o.input, !o.no_header).values;
    const DataMatrix points = read_points_csv(o.points, !o.points_no_header);
    EvalGrid{points}.validate(x.rows, o.k);
    RngStream rng(o.seed, 0);
    const CovarianceEstimate est = bootstrap_covariance(method, x, o.k, points, o.replications, rng);

    const std::size_t q = points.rows;
    DataMatrix cov(q, q);
    std::copy(est.cov.begin(), est.cov.end(), cov.data.begin());
    std::vector<std::string> header(q);
    for (std::size_t j = 0; j < q; ++j) header[j] = "p" + std::to_string(j + 1);
    write_csv(o.out + ".csv", header, cov);

    json jres;
    json jpoints = json::array();
    for (std::size_t i = 0; i < q; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < points.cols; ++j) row.push_back(points(i, j));
        jpoints.push_back(std::move(row));
    }
    json jcov = json::array();
    for (std::size_t a = 0; a < q; ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < q; ++b) row.push_back(est.cov[a * q + b]);
        jcov.push_back(std::move(row));
    }
    jres["method"] = o.method;
    jres["points"] = std::move(jpoints);
    jres["covariance"] = std::move(jcov);
    jres["replications"] = est.replications;
    jres["redraws"] = est.redraws;
    std::ofstream outf(o.out + ".json", std::ios::binary);
    if (!outf) throw std::runtime_error("cannot write bootstrap result: " + o.out + ".json");
    outf << jres.dump(2) << '\n';

    json options;
    options["input"] = o.input;
    options["no_header"] = o.no_header;
    options["k"] = o.k;
    options["method"] = o.method;
    options["points"] = o.points;
    options["points_no_header"] = o.points_no_header;
    options["replications"] = o.replications;
    options["seed"] = o.seed;
    options["out"] = o.out;
    write_manifest(o.out + ".manifest.json", "bootstrap", options, elapsed_since(t0));
}

// ------------------------------------------------------------------- study

StdfFlavor flavor_from_name(const std::string& s) {
    if (s == "beta") return StdfFlavor::Beta;
    if (s == "empirical") return StdfFlavor::Empirical;
    throw std::invalid_argument("unknown estimator flavor '" + s + "'");
}

DataMatrix points_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("study config: points must be a nonempty array");
    const std::size_t q = j.size();
    const std::size_t d = j[0].size();
    DataMatrix m(q, d);
    for (std::size_t i = 0; i < q; ++i) {
        if (j[i].size() != d) throw std::invalid_argument("study config: ragged points array");
        for (std::size_t c = 0; c < d; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

json points_to_json(const DataMatrix& m) {
    json j = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(i, c));
        j.push_back(std::move(row));
    }
    return j;
}

StudyConfig study_config_from_json(const json& j) {
    StudyConfig cfg;
    cfg.mode = study_mode_from_name(j.at("mode").get<std::string>());
    cfg.model = model_from_json(j.at("model"));
    cfg.n = j.at("n").get<std::size_t>();
    cfg.k_values = j.at("k_values").get<std::vector<double>>();
    if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
    if (j.contains("estimators")) {
        cfg.estimator_flavors.clear();
        for (const auto& s : j.at("estimators"))
            cfg.estimator_flavors.push_back(flavor_from_name(s.get<std::string>()));
    }
    if (j.contains("offset")) cfg.offset = j.at("offset").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("oracle")) {
        OracleConfig oc;
        const auto& joc = j.at("oracle");
        if (joc.contains("mc")) oc.mc = joc.at("mc").get<std::size_t>();
        if (joc.contains("seed")) oc.seed = joc.at("seed").get<std::uint64_t>();
        if (joc.contains("cache_dir")) oc.cache_dir = joc.at("cache_dir").get<std::string>();
        cfg.oracle = oc;
    }
    if (j.contains("fit")) {
        FitStudyConfig fc;
        const auto& jf = j.at("fit");
        fc.family = jf.at("family").get<std::string>();
        fc.points = points_from_json(jf.at("points"));
        fc.true_params = jf.at("true_params").get<std::vector<double>>();
        if (jf.contains("lower")) fc.lower = jf.at("lower").get<std::vector<double>>();
        if (jf.contains("upper")) fc.upper = jf.at("upper").get<std::vector<double>>();
        cfg.fit = std::move(fc);
    }
    if (j.contains("bootstrap")) {
        BootstrapStudyConfig bc;
        const auto& jb = j.at("bootstrap");
        bc.replications_inner = jb.at("replications_inner").get<int>();
        bc.num_samples = jb.at("num_samples").get<int>();
        bc.points = points_from_json(jb.at("points"));
        if (jb.contains("methods")) {
            bc.methods.clear();
            for (const auto& s : jb.at("methods")) {
                const std::string name = s.get<std::string>();
                if (name == "beta") bc.methods.push_back(BootstrapMethod::Beta);
                else if (name == "multiplier") bc.methods.push_back(BootstrapMethod::Multiplier);
                else throw std::invalid_argument("unknown bootstrap method '" + name + "'");
            }
        }
        bc.reference_csv = jb.value("reference_csv", std::string{});
        cfg.bootstrap = std::move(bc);
    }
    return cfg;
}

json study_config_to_json(const StudyConfig& cfg) {
    json j;
    j["mode"] = study_mode_name(cfg.mode);
    j["model"] = model_to_json(cfg.model);
    j["n"] = cfg.n;
    j["k_values"] = cfg.k_values;
    j["replications"] = cfg.replications;
    json est = json::array();
    for (auto f : cfg.estimator_flavors) est.push_back(flavor_name(f));
    j["estimators"] = std::move(est);
    j["offset"] = cfg.offset;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    if (cfg.oracle) {
        j["oracle"] = {{"mc", cfg.oracle->mc},
                       {"seed", cfg.oracle->seed},
                       {"cache_dir", cfg.oracle->cache_dir}};
    }
    if (cfg.fit) {
        json jf;
        jf["family"] = cfg.fit->family;
        jf["points"] = points_to_json(cfg.fit->points);
        jf["true_params"] = cfg.fit->true_params;
        if (!cfg.fit->lower.empty()) jf["lower"] = cfg.fit->lower;
        if (!cfg.fit->upper.empty()) jf["upper"] = cfg.fit->upper;
        j["fit"] = std::move(jf);
    }
    if (cfg.bootstrap) {
        json jb;
        jb["replications_inner"] = cfg.bootstrap->replications_inner;
        jb["num_samples"] = cfg.bootstrap->num_samples;
        jb["points"] = points_to_json(cfg.bootstrap->points);
        json methods = json::array();
        for (auto m : cfg.bootstrap->methods)
            methods.push_back(m == BootstrapMethod::Beta ? "beta" : "multiplier");
        jb["methods"] = std::move(methods);
        jb["reference_csv"] = cfg.bootstrap->reference_csv;
        j["bootstrap"] = std::move(jb);
    }
    return j;
}

// Desk preset: same designs at a fraction of the Monte Carlo budget.
void scale_to_desk(StudyConfig& cfg) {
    switch (cfg.mode) {
        case StudyMode::IntegratedError:
            cfg.replications = std::min(cfg.replications, 2000);
            break;
        case StudyMode::WlsRmse:
            cfg.replications = std::min(cfg.replications, 500);
            break;
        case StudyMode::BootstrapTable:
            if (cfg.bootstrap) {
                cfg.bootstrap->num_samples = std::min(cfg.bootstrap->num_samples, 200);
                cfg.bootstrap->replications_inner = std::min(cfg.bootstrap->replications_inner, 200);
            }
            break;
    }
}

struct StudyOpts {
    std::string config;
    std::string out;
    std::string preset = "paper";
    int threads = 0;  // 0: STDF_THREADS env or hardware
    bool precompute = false;
    std::uint64_t seed = 0;
};

void run_study_cmd(const StudyOpts& o, const CLI::App* sub) {
    if (o.config.empty()) throw std::invalid_argument("study: --config is required");
    if (o.preset != "paper" && o.preset != "desk")
        throw std::invalid_argument("study: --preset must be 'paper' or 'desk'");

    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg = study_config_from_json(load_config(o.config, "study"));
    if (o.preset == "desk") scale_to_desk(cfg);
    if (sub->count("--threads") > 0) cfg.threads = o.threads;
    else if (cfg.threads <= 0) cfg.threads = 0;  // resolve via env/hardware
    if (sub->count("--seed") > 0) cfg.seed = o.seed;

    if (o.precompute) {
        const std::size_t computed = precompute_oracle(cfg);
        std::cout << "oracle points computed: " << computed << "\n";
        return;
    }

    if (o.out.empty()) throw std::invalid_argument("study: --out directory is required");
    std::filesystem::create_directories(o.out);
    const StudyResult res = run_study(cfg);

    const std::filesystem::path dir(o.out);
    write_study_csv(res, (dir / "results.csv").string());

    json summary;
    summary["mode"] = study_mode_name(res.mode);
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"estimator", r.estimator},
                        {"k", r.k},
                        {"metric", r.metric},
                        {"value", r.value},
                        {"stderr", r.se}});
    summary["rows"] = std::move(rows);
    summary["tie_redraws"] = res.tie_redraws;
    summary["multiplier_redraws"] = res.multiplier_redraws;
    {
        std::ofstream outf(dir / "summary.json", std::ios::binary);
        if (!outf) throw std::runtime_error("cannot write study summary");
        outf << summary.dump(2) << '\n';
    }

    json options;
    options["config"] = o.config;
    options["out"] = o.out;
    options["preset"] = o.preset;
    options["threads"] = cfg.threads;
    json extra;
    extra["study_config"] = study_config_to_json(cfg);
    extra["threads_resolved"] = resolve_threads(cfg.threads);
    extra["tie_redraws"] = res.tie_redraws;
    extra["multiplier_redraws"] = res.multiplier_redraws;
    extra["study_runtime_seconds"] = res.runtime_seconds;
    write_manifest((dir / "manifest.json").string(), "study", options, elapsed_since(t0), extra);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"stable tail dependence estimation toolkit"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* s_sim = app.add_subcommand("simulate", "draw samples from a dependence model");
    s_sim->add_option("--model", sim.model, "logistic | max-linear | brown-resnick | clayton");
    s_sim->add_option("--theta", sim.theta, "dependence parameter (logistic, clayton)");
    s_sim->add_option("--theta-list", sim.theta_list, "max-linear: per-margin weights t_j")
        ->delimiter(',');
    s_sim->add_option("--rho", sim.rho, "brown-resnick variogram scale");
    s_sim->add_option("--alpha", sim.alpha, "brown-resnick variogram exponent");
    s_sim->add_option("--sites", sim.sites, "brown-resnick sites: 'unit-square' or a JSON file");
    s_sim->add_option("--model-json", sim.model_json_path, "full model specification (JSON file)");
    s_sim->add_option("--d", sim.d, "dimension (logistic)");
    s_sim->add_option("--n", sim.n, "number of observations");
    s_sim->add_option("--seed", sim.seed, "RNG seed (required)");
    s_sim->add_option("--out", sim.out, "output CSV path");
    s_sim->add_option("--config", sim.config, "JSON options file (flags override)");
    s_sim->callback([&] { run_simulate(sim, s_sim); });

    RanksOpts rk;
    CLI::App* s_rk = app.add_subcommand("ranks", "column ranks of a data CSV");
    s_rk->add_option("--input", rk.input, "input CSV");
    s_rk->add_option("--out", rk.out, "output CSV of ranks");
    s_rk->add_flag("--no-header", rk.no_header, "input has no header row");
    s_rk->add_flag("--jitter", rk.jitter, "break ties with seeded uniform noise");
    s_rk->add_option("--jitter-seed", rk.jitter_seed, "seed for the tie-breaking noise");
    s_rk->add_option("--jitter-scale", rk.jitter_scale, "noise half-width relative to column range");
    s_rk->add_option("--config", rk.config, "JSON options file (flags override)");
    s_rk->callback([&] { run_ranks(rk, s_rk); });

    EstimateOpts est;
    CLI::App* s_est = app.add_subcommand("estimate", "stdf estimates on a grid");
    s_est->add_option("--input", est.input, "data CSV");
    s_est->add_flag("--input-ranks", est.input_is_ranks, "input already contains ranks");
    s_est->add_flag("--no-header", est.no_header, "input has no header row");
    s_est->add_option("--k", est.k, "tail sample fraction parameter");
    s_est->add_option("--estimator", est.estimator, "beta | empirical");
    s_est->add_option("--offset", est.offset, "empirical threshold offset (0, 0.5, 1)");
    s_est->add_option("--grid", est.grid, "CSV of evaluation points");
    s_est->add_flag("--grid-no-header", est.grid_no_header, "grid has no header row");
    s_est->add_option("--out", est.out, "output CSV");
    s_est->add_option("--config", est.config, "JSON options file (flags override)");
    s_est->callback([&] { run_estimate(est, s_est); });

    FitOpts fit;
    CLI::App* s_fit = app.add_subcommand("fit", "weighted least squares parametric fit");
    s_fit->add_option("--input", fit.input, "data CSV");
    s_fit->add_flag("--no-header", fit.no_header, "input has no header row");
    s_fit->add_option("--k", fit.k, "tail sample fraction parameter");
    s_fit->add_option("--pilot", fit.pilot, "pilot estimator: beta | empirical");
    s_fit->add_option("--offset", fit.offset, "empirical pilot threshold offset");
    s_fit->add_option("--family", fit.family, "logistic | brown_resnick");
    s_fit->add_option("--points", fit.points, "CSV of fit evaluation points");
    s_fit->add_flag("--points-no-header", fit.points_no_header, "points file has no header row");
    s_fit->add_option("--sites", fit.sites, "brown_resnick sites: 'unit-square' or a JSON file");
    s_fit->add_option("--lower", fit.lower, "parameter lower bounds")->delimiter(',');
    s_fit->add_option("--upper", fit.upper, "parameter upper bounds")->delimiter(',');
    s_fit->add_option("--out", fit.out, "output JSON");
    s_fit->add_option("--config", fit.config, "JSON options file (flags override)");
    s_fit->callback([&] { run_fit(fit, s_fit); });

    BootstrapOpts bt;
    CLI::App* s_bt = app.add_subcommand("bootstrap", "bootstrap covariance of the tail copula");
    s_bt->add_option("--input", bt.input, "data CSV (bivariate)");
    s_bt->add_flag("--no-header", bt.no_header, "input has no header row");
    s_bt->add_option("--k", bt.k, "tail sample fraction parameter");
    s_bt->add_option("--method", bt.method, "beta | multiplier");
    s_bt->add_option("--points", bt.points, "CSV of evaluation points");
    s_bt->add_flag("--points-no-header", bt.points_no_header, "points file has no header row");
    s_bt->add_option("--replications", bt.replications, "bootstrap replicates B");
    s_bt->add_option("--seed", bt.seed, "RNG seed (required)");
    s_bt->add_option("--out", bt.out, "output prefix (.csv/.json appended)");
    s_bt->add_option("--config", bt.config, "JSON options file (flags override)");
    s_bt->callback([&] { run_bootstrap(bt, s_bt); });

    StudyOpts st;
    CLI::App* s_st = app.add_subcommand("study", "Monte Carlo study harness");
    s_st->add_option("--config", st.config, "study configuration JSON (required)");
    s_st->add_option("--out", st.out, "output directory");
    s_st->add_option("--preset", st.preset, "paper | desk (desk shrinks the Monte Carlo budget)");
    s_st->add_option("--threads", st.threads, "worker threads (default: STDF_THREADS or hardware)");
    s_st->add_flag("--precompute-oracle", st.precompute, "only fill the true-stdf oracle cache");
    s_st->add_option("--seed", st.seed, "override the config seed");
    s_st->callback([&] { run_study_cmd(st, s_st); });

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("stdf");
    for (const auto& a : args) argv_store.push_back(a);
    std::vector<char*> argv;
    argv.reserve(argv_store.size());
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::string type = "runtime_error";
        if (dynamic_cast<const TiesDetected*>(&e)) type = "ties_detected";
        else if (dynamic_cast<const std::domain_error*>(&e)) type = "domain_error";
        else if (dynamic_cast<const std::invalid_argument*>(&e)) type = "invalid_argument";
        json err;
        err["error"] = {{"type", type}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(std::size_t(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace stdf::cli
