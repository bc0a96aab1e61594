#include "stdf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stdf/models.hpp"

namespace stdf {

std::pair<std::vector<double>, std::vector<double>> LogisticFamily::default_bounds() const {
    return {{1e-4}, {1.0}};
}

double LogisticFamily::value(std::span<const double> theta, std::span<const double> x) const {
    if (theta.size() != 1) throw std::invalid_argument("logistic family: one parameter expected");
    if (x.size() != 2) throw std::invalid_argument("logistic family: bivariate points expected");
    const double t = theta[0];
    return std::pow(std::pow(x[0], 1.0 / t) + std::pow(x[1], 1.0 / t), t);
}

BrownResnickPairwiseFamily::BrownResnickPairwiseFamily(std::vector<std::array<double, 2>> sites)
    : sites_(std::move(sites)) {
    if (sites_.size() < 2)
        throw std::invalid_argument("brown_resnick family: need at least two sites");
}

std::pair<std::vector<double>, std::vector<double>> BrownResnickPairwiseFamily::default_bounds()
    const {
    return {{0.05, 0.05}, {2.0, 20.0}};
}

double BrownResnickPairwiseFamily::value(std::span<const double> theta,
                                         std::span<const double> x) const {
    if (theta.size() != 2) throw std::invalid_argument("brown_resnick family: two parameters expected");
    if (x.size() != sites_.size())
        throw std::invalid_argument("brown_resnick family: point dimension does not match sites");
    int a = -1, b = -1;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] > 0.0) {
            if (a < 0) a = int(j);
            else if (b < 0) b = int(j);
            else throw std::invalid_argument("brown_resnick family: points must be two-hot (pairwise fit)");
        } else if (x[j] != 0.0) {
            throw std::domain_error("brown_resnick family: coordinates must be nonnegative");
        }
    }
    if (b < 0) throw std::invalid_argument("brown_resnick family: points must have exactly two positive coordinates");
    const double alpha = theta[0], rho = theta[1];
    BrownResnickModel m;
    m.sites = sites_;
    m.rho = rho;
    m.alpha = alpha;
    const double g = br_variogram(m, sites_[a][0] - sites_[b][0], sites_[a][1] - sites_[b][1]);
    return hr_pairwise_stdf(g, x[a], x[b]);
}

std::unique_ptr<StdfFamily> make_family(const std::string& name,
                                        const std::vector<std::array<double, 2>>& sites) {
    if (name == "logistic") return std::make_unique<LogisticFamily>();
    if (name == "brown_resnick") return std::make_unique<BrownResnickPairwiseFamily>(sites);
    throw std::invalid_argument("unknown stdf family '" + name + "'");
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int max_iter) {
    if (!(lo < hi)) throw std::invalid_argument("golden_section_minimize: need lo < hi");
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

namespace {

// Reflect a proposal back inside [lo, hi], coordinate by coordinate.
void reflect_into_box(std::vector<double>& x, std::span<const double> lo,
                      std::span<const double> hi) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double w = hi[j] - lo[j];
        double v = x[j];
        for (int guard = 0; (v < lo[j] || v > hi[j]) && guard < 64; ++guard) {
            if (v < lo[j]) v = 2.0 * lo[j] - v;
            if (v > hi[j]) v = 2.0 * hi[j] - v;
        }
        x[j] = std::clamp(v, lo[j], hi[j]);
        (void)w;
    }
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& f,
                                      std::span<const double> x0, std::span<const double> lo,
                                      std::span<const double> hi, double tol, int max_iter) {
    const std::size_t p = x0.size();
    if (p == 0 || lo.size() != p || hi.size() != p)
        throw std::invalid_argument("nelder_mead_minimize: inconsistent dimensions");
    for (std::size_t j = 0; j < p; ++j)
        if (!(lo[j] < hi[j])) throw std::invalid_argument("nelder_mead_minimize: infeasible bounds");

    NelderMeadResult res;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(std::span<const double>(x));
    };

    // Initial simplex: x0 plus 5% of the box width along each axis.
    std::vector<std::vector<double>> simplex(p + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t j = 0; j < p; ++j) {
        simplex[j + 1][j] += 0.05 * (hi[j] - lo[j]);
        reflect_into_box(simplex[j + 1], lo, hi);
    }
    std::vector<double> fv(p + 1);
    for (std::size_t v = 0; v <= p; ++v) fv[v] = eval(simplex[v]);

    const double a_refl = 1.0, a_exp = 2.0, a_contr = 0.5, a_shrink = 0.5;
    std::vector<std::size_t> order(p + 1);
    std::vector<double> centroid(p), cand(p);

    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t v = 0; v <= p; ++v) order[v] = v;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fv[a] < fv[b] || (fv[a] == fv[b] && a < b);
        });
        const std::size_t best = order[0], worst = order[p], second = order[p - 1];

        double diam = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double mn = simplex[0][j], mx = simplex[0][j];
            for (std::size_t v = 1; v <= p; ++v) {
                mn = std::min(mn, simplex[v][j]);
                mx = std::max(mx, simplex[v][j]);
            }
            diam = std::max(diam, mx - mn);
        }
        if (diam < tol) {
            res.converged = true;
            break;
        }

        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t v = 0; v <= p; ++v)
                if (v != worst) s += simplex[v][j];
            centroid[j] = s / double(p);
        }

        auto propose = [&](double coef) {
            std::vector<double> y(p);
            for (std::size_t j = 0; j < p; ++j)
                y[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
            reflect_into_box(y, lo, hi);
            return y;
        };

        cand = propose(a_refl);
        const double f_refl = eval(cand);
        if (f_refl < fv[best]) {
            auto expd = propose(a_exp);
            const double f_exp = eval(expd);
            if (f_exp < f_refl) {
                simplex[worst] = std::move(expd);
                fv[worst] = f_exp;
            } else {
                simplex[worst] = std::move(cand);
                fv[worst] = f_refl;
            }
        } else if (f_refl < fv[second]) {
            simplex[worst] = std::move(cand);
            fv[worst] = f_refl;
        } else {
            auto contr = propose(-a_contr);
            const double f_contr = eval(contr);
            if (f_contr < fv[worst]) {
                simplex[worst] = std::move(contr);
                fv[worst] = f_contr;
            } else {
                for (std::size_t v = 0; v <= p; ++v) {
                    if (v == best) continue;
                    for (std::size_t j = 0; j < p; ++j)
                        simplex[v][j] = simplex[best][j] + a_shrink * (simplex[v][j] - simplex[best][j]);
                    fv[v] = eval(simplex[v]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t v = 1; v <= p; ++v)
        if (fv[v] < fv[best]) best = v;
    res.x = simplex[best];
    res.value = fv[best];
    res.evaluations = evals;
    return res;
}

namespace {

void validate_omega(const std::vector<double>& omega, std::size_t q) {
    if (omega.empty()) return;
    if (omega.size() != q * q) throw std::invalid_argument("wls_fit: Omega must be q x q");
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b)
            if (std::abs(omega[a * q + b] - omega[b * q + a]) > 1e-12)
                throw std::invalid_argument("wls_fit: Omega must be symmetric");
    cholesky_psd(omega, q);  // throws if indefinite
}

}  // namespace

FitResult wls_fit(const StdfFamily& family, std::span<const double> pilot, const FitConfig& cfg) {
    const std::size_t q = cfg.points.rows;
    const std::size_t p = family.n_params();
    if (q == 0) throw std::invalid_argument("wls_fit: no evaluation points");
    if (cfg.points.cols != family.dim())
        throw std::invalid_argument("wls_fit: point dimension does not match family");
    if (pilot.size() != q)
        throw std::invalid_argument("wls_fit: pilot length does not match points");
    validate_omega(cfg.omega, q);

    auto [lo, hi] = family.default_bounds();
    if (!cfg.lower.empty()) lo = cfg.lower;
    if (!cfg.upper.empty()) hi = cfg.upper;
    if (lo.size() != p || hi.size() != p)
        throw std::invalid_argument("wls_fit: bounds length does not match parameter count");
    for (std::size_t j = 0; j < p; ++j)
        if (!(lo[j] < hi[j])) throw std::invalid_argument("wls_fit: infeasible bounds");

    FitResult res;

    // Clamp pilots into [0, sum_j c_rj]; the true stdf always lies there.
    std::vector<double> y(pilot.begin(), pilot.end());
    for (std::size_t r = 0; r < q; ++r) {
        if (!std::isfinite(y[r])) throw std::invalid_argument("wls_fit: non-finite pilot value");
        double ub = 0.0;
        for (std::size_t j = 0; j < cfg.points.cols; ++j) ub += cfg.points(r, j);
        const double clamped = std::clamp(y[r], 0.0, ub);
        if (clamped != y[r]) ++res.clamped_pilot;
        y[r] = clamped;
    }

    int evals = 0;
    std::vector<double> resid(q);
    auto objective = [&](std::span<const double> theta) {
        ++evals;
        for (std::size_t r = 0; r < q; ++r)
            resid[r] = family.value(theta, std::span<const double>(cfg.points.row(r), cfg.points.cols)) - y[r];
        if (cfg.omega.empty()) {
            double s = 0.0;
            for (double v : resid) s += v * v;
            return s;
        }
        double s = 0.0;
        for (std::size_t a = 0; a < q; ++a)
            for (std::size_t b = 0; b < q; ++b) s += resid[a] * cfg.omega[a * q + b] * resid[b];
        return s;
    };

    if (p == 1) {
        // Coarse scan, then golden section on the bracketing interval.
        const int g = std::max(cfg.coarse_points, 4);
        double best_x = lo[0], best_f = 0.0;
        int best_i = 0;
        for (int i = 0; i < g; ++i) {
            const double x = lo[0] + (hi[0] - lo[0]) * (double(i) + 0.5) / double(g);
            const double fx = objective(std::span<const double>(&x, 1));
            if (i == 0 || fx < best_f) {
                best_f = fx;
                best_x = x;
                best_i = i;
            }
        }
        const double step = (hi[0] - lo[0]) / double(g);
        const double a = std::max(lo[0], best_x - step);
        const double b = std::min(hi[0], best_x + step);
        (void)best_i;
        const double xstar = golden_section_minimize(
            [&](double x) { return objective(std::span<const double>(&x, 1)); }, a, b, cfg.tol,
            cfg.max_iter);
        res.theta = {xstar};
        res.objective = objective(std::span<const double>(&xstar, 1));
        res.converged = true;
    } else {
        // 5^p lattice, Nelder-Mead restarted from the best lattice points.
        const int side = 5;
        std::size_t total = 1;
        for (std::size_t j = 0; j < p; ++j) total *= std::size_t(side);
        std::vector<std::pair<double, std::vector<double>>> lattice;
        lattice.reserve(total);
        std::vector<double> pt(p);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (std::size_t j = 0; j < p; ++j) {
                const int cell = int(rem % std::size_t(side));
                rem /= std::size_t(side);
                pt[j] = lo[j] + (hi[j] - lo[j]) * (double(cell) + 0.5) / double(side);
            }
            lattice.emplace_back(objective(pt), pt);
        }
        std::sort(lattice.begin(), lattice.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        NelderMeadResult best;
        bool have = false;
        const int starts = std::min<int>(cfg.restarts, int(lattice.size()));
        for (int s = 0; s < starts; ++s) {
            auto r = nelder_mead_minimize(objective, lattice[std::size_t(s)].second, lo, hi,
                                          cfg.tol, cfg.max_iter);
            if (!have || r.value < best.value) {
                best = std::move(r);
                have = true;
            }
        }
        res.theta = best.x;
        res.objective = best.value;
        res.converged = best.converged;
    }
    res.evaluations = evals;
    return res;
}

FitResult wls_fit_from_ranks(const StdfFamily& family, const RankMatrix& r, double k,
                             StdfFlavor pilot_flavor, const FitConfig& cfg, double offset) {
    const std::size_t q = cfg.points.rows;
    std::vector<double> pilot(q);
    for (std::size_t m = 0; m < q; ++m) {
        const std::span<const double> x(cfg.points.row(m), cfg.points.cols);
        pilot[m] = pilot_flavor == StdfFlavor::Beta ? empirical_beta_stdf(r, k, x)
                                                    : empirical_stdf(r, k, x, offset);
    }
    return wls_fit(family, pilot, cfg);
}

}  // namespace stdf
