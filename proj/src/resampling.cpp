#include "stdf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stdf/estimators.hpp"
#include "stdf/numerics.hpp"
#include "stdf/ranks.hpp"

namespace stdf {

void draw_beta_copula_observation(const RankMatrix& r, RngStream& rng, std::span<double> out) {
    if (r.rows == 0 || r.cols == 0)
        throw std::invalid_argument("draw_beta_copula_observation: empty rank matrix");
    if (out.size() != r.cols)
        throw std::invalid_argument("draw_beta_copula_observation: output length mismatch");
    const std::size_t i = rng.uniform_below(r.rows);
    const double n = double(r.rows);
    for (std::size_t j = 0; j < r.cols; ++j) {
        const double rank = double(r(i, j));
        out[j] = rng.beta(rank, n - rank + 1.0);
    }
}

RankMatrix beta_bootstrap_ranks(const RankMatrix& r, RngStream& rng) {
    if (r.rows == 0 || r.cols == 0)
        throw std::invalid_argument("beta_bootstrap_ranks: empty rank matrix");
    DataMatrix draws(r.rows, r.cols);
    for (;;) {
        for (std::size_t i = 0; i < r.rows; ++i)
            draw_beta_copula_observation(r, rng, std::span<double>(draws.row(i), r.cols));
        try {
            return column_ranks(draws);
        } catch (const TiesDetected&) {
            // Exact float collision between two Beta draws: redraw the replicate.
            continue;
        }
    }
}

void MultiplierLaw::validate() const {
    if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("MultiplierLaw: values and probs must match and be nonempty");
    double psum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) throw std::invalid_argument("MultiplierLaw: weights must be nonnegative");
        if (!(probs[i] >= 0.0)) throw std::invalid_argument("MultiplierLaw: probabilities must be nonnegative");
        psum += probs[i];
        m1 += probs[i] * values[i];
        m2 += probs[i] * values[i] * values[i];
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw std::invalid_argument("MultiplierLaw: probabilities must sum to 1");
    if (std::abs(m1 - 1.0) > 1e-12) throw std::invalid_argument("MultiplierLaw: mean must be 1");
    // The law degenerate at 1 (all weights equal) is allowed as a diagnostic:
    // it reproduces the plain empirical tail copula. Any real resampling law
    // must have unit variance.
    if (values.size() > 1 && std::abs(m2 - m1 * m1 - 1.0) > 1e-12)
        throw std::invalid_argument("MultiplierLaw: variance must be 1");
}

double MultiplierLaw::draw(RngStream& rng) const {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += probs[i];
        if (u <= acc) return values[i];
    }
    return values.back();
}

MultiplierEngine::MultiplierEngine(const DataMatrix& x) : n_(x.rows), x_(&x) {
    if (x.rows < 2) throw std::invalid_argument("MultiplierEngine: need at least two observations");
    if (x.cols != 2) throw std::invalid_argument("MultiplierEngine: defined for d = 2");
    for (int j = 0; j < 2; ++j) {
        order_[j].resize(n_);
        std::iota(order_[j].begin(), order_[j].end(), std::size_t{0});
        std::sort(order_[j].begin(), order_[j].end(), [&](std::size_t a, std::size_t b) {
            const double va = x(a, std::size_t(j)), vb = x(b, std::size_t(j));
            return va < vb || (va == vb && a < b);
        });
    }
}

int MultiplierEngine::replicate(double k, const DataMatrix& points, RngStream& rng,
                                const MultiplierLaw& law, std::span<double> out) const {
    law.validate();
    const std::size_t n = n_;
    if (!(k > 0.0) || k > double(n))
        throw std::domain_error("multiplier replicate: k must lie in (0, n]");
    if (points.cols != 2) throw std::invalid_argument("multiplier replicate: points must be bivariate");
    if (out.size() != points.rows)
        throw std::invalid_argument("multiplier replicate: output length mismatch");

    std::vector<double> xi(n);
    int redraws = 0;
    double total = 0.0;
    for (;;) {
        total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = law.draw(rng);
            total += xi[i];
        }
        if (total > 0.0) break;
        ++redraws;  // all-zero multipliers: the weighted CDFs would be undefined
    }

    // Normalized weights xi_i / sum(xi): the weighted ECDFs then have total
    // mass one. Cumulative weights are laid out in each column's sort order
    // so generalized inverses become index lookups.
    std::vector<double> cum[2];
    std::vector<std::size_t> pos[2];
    for (int j = 0; j < 2; ++j) {
        cum[j].resize(n);
        pos[j].resize(n);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += xi[order_[j][t]] / total;
            cum[j][t] = acc;
            pos[j][order_[j][t]] = t;
        }
    }

    // cut index for probability p: the largest sort position included in
    // {X <= G^-(p)}. p = 0 includes nothing (cutoff below all data), so the
    // estimator vanishes exactly at degenerate points.
    auto cut_index = [&](int j, double p) -> std::ptrdiff_t {
        if (p <= 0.0) return -1;
        const auto it = std::lower_bound(cum[j].begin(), cum[j].end(), p);
        if (it == cum[j].end()) return std::ptrdiff_t(n) - 1;
        return it - cum[j].begin();
    };

    for (std::size_t q = 0; q < points.rows; ++q) {
        const double x1 = points(q, 0), x2 = points(q, 1);
        if (!(x1 >= 0.0) || !(x2 >= 0.0))
            throw std::domain_error("multiplier replicate: coordinates must be nonnegative");
        if (k / double(n) * std::max(x1, x2) > 1.0)
            throw std::domain_error("multiplier replicate: (k/n) x_j exceeds 1");
        const std::ptrdiff_t c1 = cut_index(0, k / double(n) * x1);
        const std::ptrdiff_t c2 = cut_index(1, k / double(n) * x2);
        double s = 0.0;
        if (c1 >= 0 && c2 >= 0) {
            for (std::size_t i = 0; i < n; ++i)
                if (std::ptrdiff_t(pos[0][i]) <= c1 && std::ptrdiff_t(pos[1][i]) <= c2)
                    s += xi[i] / total;
        }
        out[q] = double(n) / k * s;
    }
    return redraws;
}

MultiplierReplicate multiplier_tail_copula(const DataMatrix& x, double k, const DataMatrix& points,
                                           RngStream& rng, const MultiplierLaw& law) {
    MultiplierEngine engine(x);
    MultiplierReplicate rep;
    rep.values.resize(points.rows);
    rep.redraws = engine.replicate(k, points, rng, law, rep.values);
    return rep;
}

std::vector<double> sample_covariance(const DataMatrix& replicates) {
    const std::size_t B = replicates.rows, q = replicates.cols;
    if (B < 2) throw std::invalid_argument("sample_covariance: need at least two replicates");
    std::vector<double> means(q), buf(B);
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t b = 0; b < B; ++b) buf[b] = replicates(b, j);
        means[j] = mean(buf);
    }
    std::vector<double> cov(q * q, 0.0);
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = a; b < q; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < B; ++i)
                acc += (replicates(i, a) - means[a]) * (replicates(i, b) - means[b]);
            cov[a * q + b] = cov[b * q + a] = acc / double(B - 1);
        }
    return cov;
}

CovarianceEstimate beta_bootstrap_covariance(const RankMatrix& r, double k,
                                             const DataMatrix& points, int B, RngStream& rng) {
    if (B < 2) throw std::invalid_argument("beta_bootstrap_covariance: need B >= 2");
    if (points.cols != 2 || r.cols != 2)
        throw std::invalid_argument("beta_bootstrap_covariance: defined for d = 2");
    const std::size_t n = r.rows;
    const double sqrtk = std::sqrt(k);

    // Order-statistic tables depend only on (n, point); share them across
    // replicates instead of rebuilding inside each bootstrap draw.
    std::vector<BetaCopulaTables> tables;
    std::vector<double> center(points.rows);
    tables.reserve(points.rows);
    for (std::size_t q = 0; q < points.rows; ++q) {
        const double u[2] = {k / double(n) * points(q, 0), k / double(n) * points(q, 1)};
        if (!(u[0] >= 0.0 && u[0] <= 1.0) || !(u[1] >= 0.0 && u[1] <= 1.0))
            throw std::domain_error("beta_bootstrap_covariance: (k/n) x_j outside [0, 1]");
        tables.emplace_back(n, std::span<const double>(u, 2));
        center[q] = double(n) / k * tables.back().copula(r);
    }

    DataMatrix stats(std::size_t(B), points.rows);
    for (int b = 0; b < B; ++b) {
        const RankMatrix rb = beta_bootstrap_ranks(r, rng);
        for (std::size_t q = 0; q < points.rows; ++q)
            stats(std::size_t(b), q) = sqrtk * (double(n) / k * tables[q].copula(rb) - center[q]);
    }

    CovarianceEstimate est;
    est.points = points;
    est.cov = sample_covariance(stats);
    est.replications = B;
    return est;
}

CovarianceEstimate multiplier_bootstrap_covariance(const DataMatrix& x, double k,
                                                   const DataMatrix& points, int B, RngStream& rng,
                                                   const MultiplierLaw& law) {
    if (B < 2) throw std::invalid_argument("multiplier_bootstrap_covariance: need B >= 2");
    MultiplierEngine engine(x);
    const RankMatrix r = column_ranks(x);
    const double sqrtk = std::sqrt(k);

    std::vector<double> center(points.rows);
    for (std::size_t q = 0; q < points.rows; ++q)
        center[q] = lower_tail_copula(r, k, std::span<const double>(points.row(q), points.cols));

    DataMatrix stats(std::size_t(B), points.rows);
    std::vector<double> rep(points.rows);
    int redraws = 0;
    for (int b = 0; b < B; ++b) {
        redraws += engine.replicate(k, points, rng, law, rep);
        for (std::size_t q = 0; q < points.rows; ++q)
            stats(std::size_t(b), q) = sqrtk * (rep[q] - center[q]);
    }

    CovarianceEstimate est;
    est.points = points;
    est.cov = sample_covariance(stats);
    est.replications = B;
    est.redraws = redraws;
    return est;
}

CovarianceEstimate bootstrap_covariance(BootstrapMethod method, const DataMatrix& x, double k,
                                        const DataMatrix& points, int B, RngStream& rng) {
    if (method == BootstrapMethod::Beta)
        return beta_bootstrap_covariance(column_ranks(x), k, points, B, rng);
    return multiplier_bootstrap_covariance(x, k, points, B, rng);
}

}  // namespace stdf
