#include "stdf/models.hpp"

#include <cmath>
#include <stdexcept>

#include "stdf/numerics.hpp"

namespace stdf {

namespace {

double frechet_from_uniform(double u) { return -1.0 / std::log(u); }

}  // namespace

void validate_model(const ModelSpec& m) {
    std::visit(
        [](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                if (!(spec.theta > 0.0 && spec.theta <= 1.0))
                    throw std::invalid_argument("logistic: theta must lie in (0, 1]");
                if (spec.d < 2) throw std::invalid_argument("logistic: need d >= 2");
            } else if constexpr (std::is_same_v<T, MaxLinearModel>) {
                const auto& a = spec.coefficients;
                if (a.rows == 0 || a.cols == 0)
                    throw std::invalid_argument("max_linear: empty coefficient matrix");
                for (std::size_t j = 0; j < a.rows; ++j) {
                    double s = 0.0;
                    for (std::size_t t = 0; t < a.cols; ++t) {
                        if (!(a(j, t) >= 0.0))
                            throw std::invalid_argument("max_linear: coefficients must be nonnegative");
                        s += a(j, t);
                    }
                    if (std::abs(s - 1.0) > 1e-9)
                        throw std::invalid_argument(
                            "max_linear: row " + std::to_string(j + 1) +
                            " of the coefficient matrix must sum to 1 (unit Fréchet margins)");
                }
            } else if constexpr (std::is_same_v<T, BrownResnickModel>) {
                if (spec.sites.empty()) throw std::invalid_argument("brown_resnick: no sites");
                if (!(spec.rho > 0.0)) throw std::invalid_argument("brown_resnick: rho must be positive");
                if (!(spec.alpha > 0.0 && spec.alpha <= 2.0))
                    throw std::invalid_argument("brown_resnick: alpha must lie in (0, 2]");
            } else if constexpr (std::is_same_v<T, ClaytonModel>) {
                if (!(spec.theta > 0.0)) throw std::invalid_argument("clayton: theta must be positive");
            }
        },
        m);
}

std::size_t model_dim(const ModelSpec& m) {
    return std::visit(
        [](const auto& spec) -> std::size_t {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, LogisticModel>) return spec.d;
            else if constexpr (std::is_same_v<T, MaxLinearModel>) return spec.coefficients.rows;
            else if constexpr (std::is_same_v<T, BrownResnickModel>) return spec.sites.size();
            else return 2;  // clayton
        },
        m);
}

std::string model_name(const ModelSpec& m) {
    return std::visit(
        [](const auto& spec) -> std::string {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, LogisticModel>) return "logistic";
            else if constexpr (std::is_same_v<T, MaxLinearModel>) return "max_linear";
            else if constexpr (std::is_same_v<T, BrownResnickModel>) return "brown_resnick";
            else return "clayton";
        },
        m);
}

double br_variogram(const BrownResnickModel& m, double dx, double dy) {
    const double h = std::hypot(dx, dy);
    if (h == 0.0) return 0.0;
    return std::pow(h / m.rho, m.alpha);
}

double true_stdf(const ModelSpec& m, std::span<const double> x) {
    const std::size_t d = model_dim(m);
    if (x.size() != d) throw std::invalid_argument("true_stdf: point dimension does not match model");
    for (double v : x)
        if (!(v >= 0.0)) throw std::domain_error("true_stdf: coordinates must be nonnegative");
    if (std::holds_alternative<LogisticModel>(m)) {
        const auto& spec = std::get<LogisticModel>(m);
        double s = 0.0;
        for (double v : x) s += std::pow(v, 1.0 / spec.theta);
        return std::pow(s, spec.theta);
    }
    if (std::holds_alternative<MaxLinearModel>(m)) {
        const auto& a = std::get<MaxLinearModel>(m).coefficients;
        double total = 0.0;
        for (std::size_t t = 0; t < a.cols; ++t) {
            double best = 0.0;
            for (std::size_t j = 0; j < a.rows; ++j) best = std::max(best, a(j, t) * x[j]);
            total += best;
        }
        return total;
    }
    if (std::holds_alternative<BrownResnickModel>(m))
        throw std::invalid_argument(
            "true_stdf: brown_resnick has no closed form; use br_stdf_oracle / BrSpectralEnsemble");
    throw std::invalid_argument(
        "true_stdf: clayton is not max-stable; use clayton_lower_tail_copula");
}

double hr_pairwise_stdf(double gamma, double x1, double x2) {
    if (!(gamma >= 0.0)) throw std::domain_error("hr_pairwise_stdf: gamma must be nonnegative");
    if (!(x1 >= 0.0) || !(x2 >= 0.0))
        throw std::domain_error("hr_pairwise_stdf: coordinates must be nonnegative");
    if (x1 == 0.0) return x2;
    if (x2 == 0.0) return x1;
    if (gamma == 0.0) return std::max(x1, x2);
    const double a = std::sqrt(2.0 * gamma);
    const double lr = std::log(x1 / x2);
    return x1 * standard_normal_cdf(0.5 * a + lr / a) + x2 * standard_normal_cdf(0.5 * a - lr / a);
}

double clayton_copula(double theta, double u1, double u2) {
    if (!(theta > 0.0)) throw std::domain_error("clayton_copula: theta must be positive");
    if (!(u1 >= 0.0 && u1 <= 1.0) || !(u2 >= 0.0 && u2 <= 1.0))
        throw std::domain_error("clayton_copula: arguments outside [0, 1]");
    if (u1 == 0.0 || u2 == 0.0) return 0.0;
    return std::pow(std::pow(u1, -theta) + std::pow(u2, -theta) - 1.0, -1.0 / theta);
}

double clayton_lower_tail_copula(double theta, double x1, double x2) {
    if (!(theta > 0.0)) throw std::domain_error("clayton_lower_tail_copula: theta must be positive");
    if (!(x1 >= 0.0) || !(x2 >= 0.0))
        throw std::domain_error("clayton_lower_tail_copula: coordinates must be nonnegative");
    if (x1 == 0.0 || x2 == 0.0) return 0.0;
    return std::pow(std::pow(x1, -theta) + std::pow(x2, -theta), -1.0 / theta);
}

std::vector<double> cholesky_psd(const std::vector<double>& a, std::size_t d, double tol) {
    if (a.size() != d * d) throw std::invalid_argument("cholesky_psd: matrix size mismatch");
    double scale = 0.0;
    for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(a[j * d + j]));
    if (scale == 0.0) scale = 1.0;
    std::vector<double> L(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = a[j * d + j];
        for (std::size_t t = 0; t < j; ++t) s -= L[j * d + t] * L[j * d + t];
        if (s < -tol * scale)
            throw std::runtime_error("cholesky_psd: matrix is not positive semidefinite");
        if (s <= tol * scale) continue;  // zero pivot: degenerate direction, column stays 0
        const double piv = std::sqrt(s);
        L[j * d + j] = piv;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = a[i * d + j];
            for (std::size_t t = 0; t < j; ++t) v -= L[i * d + t] * L[j * d + t];
            L[i * d + j] = v / piv;
        }
    }
    return L;
}

ModelSampler::ModelSampler(ModelSpec m) : spec_(std::move(m)) {
    validate_model(spec_);
    dim_ = model_dim(spec_);
    if (const auto* br = std::get_if<BrownResnickModel>(&spec_)) {
        const std::size_t d = dim_;
        gamma_mat_.assign(d * d, 0.0);
        gamma_origin_.assign(d, 0.0);
        for (std::size_t a = 0; a < d; ++a) {
            gamma_origin_[a] = br_variogram(*br, br->sites[a][0], br->sites[a][1]);
            for (std::size_t b = 0; b < d; ++b)
                gamma_mat_[a * d + b] = br_variogram(*br, br->sites[a][0] - br->sites[b][0],
                                                     br->sites[a][1] - br->sites[b][1]);
        }
        // Cov(eps0(s_a), eps0(s_b)) for the field pinned to 0 at the origin.
        std::vector<double> cov(d * d);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                cov[a * d + b] = gamma_origin_[a] + gamma_origin_[b] - gamma_mat_[a * d + b];
        chol_ = cholesky_psd(cov, d);
    }
}

void ModelSampler::sample_row(RngStream& rng, double* out) const {
    if (const auto* lg = std::get_if<LogisticModel>(&spec_)) {
        // Frailty construction: U_j = exp(-(E_j / S)^theta) with S positive
        // stable. Carried in log space so theta near 0 stays finite.
        const double log_s = rng.log_positive_stable(lg->theta);
        for (std::size_t j = 0; j < dim_; ++j) {
            const double log_e = std::log(rng.exponential());
            out[j] = std::exp(-std::exp(lg->theta * (log_e - log_s)));
        }
        return;
    }
    if (std::holds_alternative<MaxLinearModel>(spec_)) {
        maxlinear_row(rng, out, nullptr);
        return;
    }
    if (std::holds_alternative<BrownResnickModel>(spec_)) {
        br_row(rng, out);
        return;
    }
    const auto& cl = std::get<ClaytonModel>(spec_);
    const double u1 = rng.uniform01();
    const double v = rng.uniform01();
    const double th = cl.theta;
    out[0] = u1;
    out[1] = std::pow(std::pow(u1, -th) * (std::pow(v, -th / (1.0 + th)) - 1.0) + 1.0, -1.0 / th);
}

void ModelSampler::maxlinear_row(RngStream& rng, double* out, double* factors) const {
    const auto& a = std::get<MaxLinearModel>(spec_).coefficients;
    for (std::size_t j = 0; j < dim_; ++j) out[j] = 0.0;
    for (std::size_t t = 0; t < a.cols; ++t) {
        const double z = frechet_from_uniform(rng.uniform01());
        if (factors) factors[t] = z;
        for (std::size_t j = 0; j < dim_; ++j) out[j] = std::max(out[j], a(j, t) * z);
    }
}

void ModelSampler::br_row(RngStream& rng, double* out) const {
    // Exact simulation by extremal functions: sweep the sites, at site j keep
    // proposing Poisson points zeta with spectral profiles anchored at j and
    // accept those that do not exceed the running maximum at any earlier site.
    const std::size_t d = dim_;
    std::vector<double> z(d), eps(d);
    for (std::size_t j = 0; j < d; ++j) out[j] = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double acc = rng.exponential();
        double zeta = 1.0 / acc;
        while (zeta > out[j]) {
            for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t t = 0; t <= i; ++t) s += chol_[i * d + t] * z[t];
                eps[i] = s;
            }
            // Y(s_i) = exp(eps_i - eps_j - gamma(s_i - s_j)): mean-one profile
            // of the extremal function anchored at site j.
            bool accept = true;
            for (std::size_t i = 0; i < j; ++i) {
                const double y = std::exp(eps[i] - eps[j] - gamma_mat_[i * d + j]);
                if (zeta * y >= out[i]) {
                    accept = false;
                    break;
                }
            }
            if (accept) {
                for (std::size_t i = 0; i < d; ++i) {
                    const double y = std::exp(eps[i] - eps[j] - gamma_mat_[i * d + j]);
                    out[i] = std::max(out[i], zeta * y);
                }
            }
            acc += rng.exponential();
            zeta = 1.0 / acc;
        }
    }
}

void ModelSampler::sample(std::size_t n, RngStream& rng, DataMatrix& out) const {
    if (out.rows != n || out.cols != dim_) out = DataMatrix(n, dim_);
    for (std::size_t i = 0; i < n; ++i) sample_row(rng, out.row(i));
}

DataMatrix ModelSampler::sample(std::size_t n, RngStream& rng) const {
    DataMatrix out(n, dim_);
    sample(n, rng, out);
    return out;
}

DataMatrix ModelSampler::sample_with_factors(std::size_t n, RngStream& rng,
                                             DataMatrix& factors_out) const {
    const auto* ml = std::get_if<MaxLinearModel>(&spec_);
    if (!ml) throw std::invalid_argument("sample_with_factors: only available for max_linear");
    DataMatrix out(n, dim_);
    factors_out = DataMatrix(n, ml->coefficients.cols);
    for (std::size_t i = 0; i < n; ++i) maxlinear_row(rng, out.row(i), factors_out.row(i));
    return out;
}

DataMatrix sample(const ModelSpec& m, std::size_t n, RngStream& rng) {
    return ModelSampler(m).sample(n, rng);
}

BrSpectralEnsemble::BrSpectralEnsemble(const BrownResnickModel& m, std::size_t mc, RngStream& rng) {
    if (mc < 2) throw std::invalid_argument("BrSpectralEnsemble: need at least two draws");
    validate_model(ModelSpec{m});
    d_ = m.sites.size();
    mc_ = mc;
    std::vector<double> g0(d_);
    std::vector<double> cov(d_ * d_);
    for (std::size_t a = 0; a < d_; ++a) g0[a] = br_variogram(m, m.sites[a][0], m.sites[a][1]);
    for (std::size_t a = 0; a < d_; ++a)
        for (std::size_t b = 0; b < d_; ++b)
            cov[a * d_ + b] = g0[a] + g0[b] -
                              br_variogram(m, m.sites[a][0] - m.sites[b][0],
                                           m.sites[a][1] - m.sites[b][1]);
    const auto L = cholesky_psd(cov, d_);
    w_.resize(mc_ * d_);
    std::vector<double> z(d_);
    for (std::size_t i = 0; i < mc_; ++i) {
        for (std::size_t t = 0; t < d_; ++t) z[t] = rng.normal();
        for (std::size_t a = 0; a < d_; ++a) {
            double s = 0.0;
            for (std::size_t t = 0; t <= a; ++t) s += L[a * d_ + t] * z[t];
            w_[i * d_ + a] = std::exp(s - g0[a]);  // mean-one spectral weight
        }
    }
}

OracleValue BrSpectralEnsemble::stdf(std::span<const double> x) const {
    if (x.size() != d_) throw std::invalid_argument("BrSpectralEnsemble: point dimension mismatch");
    for (double v : x)
        if (!(v >= 0.0)) throw std::domain_error("BrSpectralEnsemble: coordinates must be nonnegative");
    // Welford accumulation: stable and independent of any caller threading.
    double meanv = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < mc_; ++i) {
        double mx = 0.0;
        const double* wi = &w_[i * d_];
        for (std::size_t j = 0; j < d_; ++j) mx = std::max(mx, x[j] * wi[j]);
        const double delta = mx - meanv;
        meanv += delta / double(i + 1);
        m2 += delta * (mx - meanv);
    }
    OracleValue out;
    out.value = meanv;
    out.se = std::sqrt(m2 / double(mc_ - 1) / double(mc_));
    return out;
}

OracleValue br_stdf_oracle(const BrownResnickModel& m, std::span<const double> x,
                           std::size_t mc, RngStream& rng) {
    return BrSpectralEnsemble(m, mc, rng).stdf(x);
}

}  // namespace stdf

// --- JSON serialization -----------------------------------------------------

#include "stdf/model_json.hpp"

namespace stdf {

nlohmann::json model_to_json(const ModelSpec& m) {
    nlohmann::json j;
    j["type"] = model_name(m);
    if (const auto* lg = std::get_if<LogisticModel>(&m)) {
        j["theta"] = lg->theta;
        j["d"] = lg->d;
    } else if (const auto* ml = std::get_if<MaxLinearModel>(&m)) {
        const auto& a = ml->coefficients;
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < a.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < a.cols; ++c) row.push_back(a(r, c));
            rows.push_back(std::move(row));
        }
        j["coefficients"] = std::move(rows);
    } else if (const auto* br = std::get_if<BrownResnickModel>(&m)) {
        nlohmann::json sites = nlohmann::json::array();
        for (const auto& s : br->sites) sites.push_back({s[0], s[1]});
        j["sites"] = std::move(sites);
        j["rho"] = br->rho;
        j["alpha"] = br->alpha;
    } else {
        j["theta"] = std::get<ClaytonModel>(m).theta;
    }
    return j;
}

ModelSpec model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw std::invalid_argument("model JSON: expected an object with a 'type' field");
    const std::string type = j.at("type").get<std::string>();
    ModelSpec m;
    if (type == "logistic") {
        LogisticModel lg;
        lg.theta = j.at("theta").get<double>();
        if (j.contains("d")) lg.d = j.at("d").get<std::size_t>();
        m = lg;
    } else if (type == "max_linear") {
        const auto& rows = j.at("coefficients");
        if (!rows.is_array() || rows.empty())
            throw std::invalid_argument("model JSON: max_linear needs a coefficient matrix");
        MaxLinearModel ml;
        const std::size_t d = rows.size();
        const std::size_t t = rows[0].size();
        ml.coefficients = DataMatrix(d, t);
        for (std::size_t r = 0; r < d; ++r) {
            if (rows[r].size() != t)
                throw std::invalid_argument("model JSON: ragged coefficient matrix");
            for (std::size_t c = 0; c < t; ++c) ml.coefficients(r, c) = rows[r][c].get<double>();
        }
        m = std::move(ml);
    } else if (type == "brown_resnick") {
        BrownResnickModel br;
        for (const auto& s : j.at("sites")) {
            if (!s.is_array() || s.size() != 2)
                throw std::invalid_argument("model JSON: each site must be an [x, y] pair");
            br.sites.push_back({s[0].get<double>(), s[1].get<double>()});
        }
        if (j.contains("rho")) br.rho = j.at("rho").get<double>();
        if (j.contains("alpha")) br.alpha = j.at("alpha").get<double>();
        m = std::move(br);
    } else if (type == "clayton") {
        ClaytonModel cl;
        cl.theta = j.at("theta").get<double>();
        m = cl;
    } else {
        throw std::invalid_argument("model JSON: unknown type '" + type + "'");
    }
    validate_model(m);
    return m;
}

std::string model_canonical_string(const ModelSpec& m) { return model_to_json(m).dump(); }

}  // namespace stdf
