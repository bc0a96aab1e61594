#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stdf/estimators.hpp"
#include "stdf/models.hpp"
#include "stdf/numerics.hpp"
#include "stdf/ranks.hpp"
#include "stdf/resampling.hpp"
#include "stdf/rng.hpp"
#include "test_util.hpp"

using namespace stdf;

namespace {

// Law on {0, 1, 3} with mean 1 and variance 1.
MultiplierLaw three_atom_law() {
    MultiplierLaw law;
    law.values = {0.0, 1.0, 3.0};
    law.probs = {1.0 / 3.0, 0.5, 1.0 / 6.0};
    return law;
}

DataMatrix uniform_sheet(std::size_t n, std::size_t d, RngStream& rng) {
    DataMatrix x(n, d);
    for (auto& v : x.data) v = rng.uniform01();
    return x;
}

}  // namespace

TEST_CASE("multiplier law validation") {
    MultiplierLaw def;
    CHECK_NOTHROW(def.validate());  // {0, 2} with probability 1/2 each
    CHECK_NOTHROW(three_atom_law().validate());

    MultiplierLaw one;  // degenerate at 1: allowed, reproduces the plain estimator
    one.values = {1.0};
    one.probs = {1.0};
    CHECK_NOTHROW(one.validate());

    MultiplierLaw bad = def;
    bad.probs = {0.4, 0.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // probs sum != 1
    bad = def;
    bad.values = {0.0, 3.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // mean != 1
    bad = def;
    bad.values = {0.5, 1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // variance != 1
    bad = def;
    bad.values = {-1.0, 3.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // negative weight
    bad = def;
    bad.probs = {1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // length mismatch
    MultiplierLaw two;  // degenerate away from 1 is not
    two.values = {2.0};
    two.probs = {1.0};
    CHECK_THROWS_AS(two.validate(), std::invalid_argument);
}

TEST_CASE("multiplier law draw matches its probabilities") {
    const auto law = three_atom_law();
    RngStream rng(314);
    const int n = 20000;
    int c0 = 0, c1 = 0, c3 = 0;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = law.draw(rng);
        s += v;
        s2 += v * v;
        if (v == 0.0) ++c0;
        else if (v == 1.0) ++c1;
        else if (v == 3.0) ++c3;
    }
    CHECK(c0 + c1 + c3 == n);
    CHECK(double(c0) / n == doctest::Approx(1.0 / 3.0).epsilon(0.017));
    CHECK(double(c1) / n == doctest::Approx(0.5).epsilon(0.017));
    CHECK(double(c3) / n == doctest::Approx(1.0 / 6.0).epsilon(0.017));
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(s2 / n - 1.0 == doctest::Approx(1.0).epsilon(0.07));  // variance
}

TEST_CASE("beta copula observations: range, margins, law") {
    RngStream data_rng(5);
    const auto x = uniform_sheet(20, 2, data_rng);
    const auto r = column_ranks(x);

    RngStream rng(2001);
    const std::size_t m = 100000;
    std::vector<double> u0(m), u1(m);
    std::array<double, 2> obs{};
    for (std::size_t i = 0; i < m; ++i) {
        draw_beta_copula_observation(r, rng, obs);
        CHECK(obs[0] > 0.0);
        CHECK(obs[0] < 1.0);
        u0[i] = obs[0];
        u1[i] = obs[1];
    }
    // margins of the beta copula are exactly uniform
    CHECK(stdf_test::ks_uniform(u0) < 0.006);
    CHECK(stdf_test::ks_uniform(u1) < 0.006);

    // joint law: ECDF of the draws reproduces the beta copula itself
    for (const auto& pt : {std::array<double, 2>{0.2, 0.3}, std::array<double, 2>{0.5, 0.5},
                           std::array<double, 2>{0.8, 0.4}, std::array<double, 2>{0.95, 0.9}}) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < m; ++i) hits += u0[i] <= pt[0] && u1[i] <= pt[1];
        const double target = empirical_beta_copula(r, pt);
        CHECK(double(hits) / double(m) == doctest::Approx(target).epsilon(0.006));
    }

    std::array<double, 3> wrong{};
    CHECK_THROWS_AS(draw_beta_copula_observation(r, rng, wrong), std::invalid_argument);
    CHECK_THROWS_AS(draw_beta_copula_observation(RankMatrix{}, rng, obs), std::invalid_argument);
}

TEST_CASE("beta bootstrap rank replicates") {
    RngStream data_rng(9);
    const auto x = uniform_sheet(30, 2, data_rng);
    const auto r = column_ranks(x);

    RngStream a(42), b(42), c(43);
    const auto ra = beta_bootstrap_ranks(r, a);
    const auto rb = beta_bootstrap_ranks(r, b);
    const auto rc = beta_bootstrap_ranks(r, c);
    CHECK(ra.rows == 30);
    CHECK(ra.cols == 2);
    CHECK(is_valid_rank_matrix(ra));
    CHECK(is_valid_rank_matrix(rc));
    CHECK(ra.data == rb.data);
    CHECK(ra.data != rc.data);
}

TEST_CASE("multiplier replicate: worked example with forced weights") {
    // Four observations; with weights xi = (2, 0, 2, 0) and k = 2 the
    // weighted tail copula has these exactly representable values:
    //   (1,1) -> 1, (2,1) -> 1, (2,2) -> 2, (0,1) -> 0, (0.5,2) -> 1.
    const auto x = stdf_test::make_data({{1.0, 10.0}, {2.0, 40.0}, {3.0, 20.0}, {4.0, 30.0}});
    const auto points = stdf_test::make_data(
        {{1.0, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {0.0, 1.0}, {0.5, 2.0}});
    const MultiplierLaw law;  // {0, 2}

    // find a seed whose first four draws are exactly (2, 0, 2, 0)
    std::uint64_t seed = 0;
    bool found = false;
    for (std::uint64_t s = 0; s < 500 && !found; ++s) {
        RngStream probe(s);
        if (law.draw(probe) == 2.0 && law.draw(probe) == 0.0 && law.draw(probe) == 2.0 &&
            law.draw(probe) == 0.0) {
            found = true;
            seed = s;
        }
    }
    REQUIRE(found);

    RngStream rng(seed);
    const auto rep = multiplier_tail_copula(x, 2.0, points, rng, law);
    CHECK(rep.redraws == 0);
    REQUIRE(rep.values.size() == 5);
    CHECK(rep.values[0] == 1.0);
    CHECK(rep.values[1] == 1.0);
    CHECK(rep.values[2] == 2.0);
    CHECK(rep.values[3] == 0.0);
    CHECK(rep.values[4] == 1.0);

    // the one-shot wrapper and the reusable engine agree draw for draw
    MultiplierEngine engine(x);
    std::vector<double> out(5);
    RngStream rng2(seed);
    CHECK(engine.replicate(2.0, points, rng2, law, out) == 0);
    CHECK(out == rep.values);
}

TEST_CASE("multiplier replicate with unit weights reduces to the plain estimator") {
    // dyadic sizes keep every cumulative weight exactly representable
    RngStream data_rng(13);
    const auto x = uniform_sheet(32, 2, data_rng);
    const auto r = column_ranks(x);
    MultiplierLaw one;
    one.values = {1.0};
    one.probs = {1.0};

    const auto points = stdf_test::make_data({{1.0, 2.0}, {0.5, 1.5}, {4.0, 4.0}, {0.0, 2.0}});
    RngStream rng(1);
    const auto rep = multiplier_tail_copula(x, 8.0, points, rng, one);
    for (std::size_t q = 0; q < points.rows; ++q) {
        const double plain =
            lower_tail_copula(r, 8.0, std::span<const double>(points.row(q), 2));
        CHECK(rep.values[q] == plain);
    }
}

TEST_CASE("multiplier replicate validation") {
    RngStream data_rng(3);
    const auto x = uniform_sheet(10, 2, data_rng);
    MultiplierEngine engine(x);
    RngStream rng(2);
    const MultiplierLaw law;
    std::vector<double> out(1);

    CHECK_THROWS_AS(engine.replicate(0.0, stdf_test::make_data({{1.0, 1.0}}), rng, law, out),
                    std::domain_error);
    CHECK_THROWS_AS(engine.replicate(2.0, stdf_test::make_data({{6.0, 1.0}}), rng, law, out),
                    std::domain_error);  // (k/n) x > 1
    CHECK_THROWS_AS(engine.replicate(2.0, stdf_test::make_data({{-1.0, 1.0}}), rng, law, out),
                    std::domain_error);
    CHECK_THROWS_AS(engine.replicate(2.0, stdf_test::make_data({{1.0, 1.0, 1.0}}), rng, law, out),
                    std::invalid_argument);  // not bivariate
    std::vector<double> short_out;
    CHECK_THROWS_AS(engine.replicate(2.0, stdf_test::make_data({{1.0, 1.0}}), rng, law, short_out),
                    std::invalid_argument);

    CHECK_THROWS_AS(MultiplierEngine{uniform_sheet(10, 3, data_rng)}, std::invalid_argument);
    CHECK_THROWS_AS(MultiplierEngine{uniform_sheet(1, 2, data_rng)}, std::invalid_argument);
}

TEST_CASE("sample covariance") {
    // two replicates: cov = outer(diff, diff) / 2
    const auto reps = stdf_test::make_data({{1.0, 2.0}, {3.0, 6.0}});
    const auto cov = sample_covariance(reps);
    CHECK(cov == std::vector<double>{2.0, 4.0, 4.0, 8.0});

    // single column: agrees with the scalar sample variance
    RngStream rng(8);
    DataMatrix col(50, 1);
    for (auto& v : col.data) v = rng.normal();
    CHECK(sample_covariance(col)[0] == doctest::Approx(sample_variance(col.data)).epsilon(1e-13));

    CHECK_THROWS_AS(sample_covariance(stdf_test::make_data({{1.0, 2.0}})), std::invalid_argument);
}

TEST_CASE("beta bootstrap covariance: mirrors the public building blocks") {
    RngStream data_rng(21);
    const auto x = uniform_sheet(100, 2, data_rng);
    const auto r = column_ranks(x);
    const auto points = stdf_test::make_data({{1.0, 1.0}, {2.0, 0.5}, {0.7, 1.4}});
    const double k = 20.0;
    const int B = 60;

    RngStream rng(1234);
    const auto est = beta_bootstrap_covariance(r, k, points, B, rng);
    CHECK(est.replications == B);
    CHECK(est.redraws == 0);
    CHECK(est.points.data == points.data);
    REQUIRE(est.cov.size() == 9);

    // independent reassembly from the public pieces, same stream
    const std::size_t n = r.rows;
    std::vector<BetaCopulaTables> tables;
    std::vector<double> center(points.rows);
    for (std::size_t q = 0; q < points.rows; ++q) {
        const double u[2] = {k / double(n) * points(q, 0), k / double(n) * points(q, 1)};
        tables.emplace_back(n, std::span<const double>(u, 2));
        center[q] = double(n) / k * tables.back().copula(r);
    }
    RngStream rng2(1234);
    DataMatrix stats(std::size_t(B), points.rows);
    for (int b = 0; b < B; ++b) {
        const auto rb = beta_bootstrap_ranks(r, rng2);
        for (std::size_t q = 0; q < points.rows; ++q)
            stats(std::size_t(b), q) =
                std::sqrt(k) * (double(n) / k * tables[q].copula(rb) - center[q]);
    }
    CHECK(est.cov == sample_covariance(stats));

    // symmetric and positive semidefinite
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) CHECK(est.cov[a * 3 + b] == est.cov[b * 3 + a]);
    CHECK(stdf_test::min_eigen_sym(est.cov, 3) >= -1e-10);

    RngStream rng3(99);
    CHECK_THROWS_AS(beta_bootstrap_covariance(r, k, points, 1, rng3), std::invalid_argument);
    CHECK_THROWS_AS(beta_bootstrap_covariance(r, 95.0, points, 10, rng3), std::domain_error);
}

TEST_CASE("multiplier bootstrap covariance: determinism, shape, redraw counting") {
    RngStream data_rng(27);
    const auto x = uniform_sheet(80, 2, data_rng);
    const auto points = stdf_test::make_data({{1.0, 1.0}, {1.5, 0.5}});
    const double k = 16.0;

    RngStream a(7), b(7), c(8);
    const auto ea = multiplier_bootstrap_covariance(x, k, points, 200, a);
    const auto eb = multiplier_bootstrap_covariance(x, k, points, 200, b);
    const auto ec = multiplier_bootstrap_covariance(x, k, points, 200, c);
    CHECK(ea.cov == eb.cov);
    CHECK(ea.cov != ec.cov);
    CHECK(ea.replications == 200);
    CHECK(ea.redraws == 0);  // all-zero draws essentially impossible at n = 80
    CHECK(ea.cov[1] == ea.cov[2]);
    CHECK(stdf_test::min_eigen_sym(ea.cov, 2) >= -1e-10);
    CHECK(ea.cov[0] > 0.0);

    // with two observations, all-zero {0,2} draws happen 1/4 of the time
    const auto tiny = stdf_test::make_data({{0.3, 0.8}, {0.6, 0.1}});
    RngStream t(5);
    const auto et = multiplier_bootstrap_covariance(tiny, 1.0, stdf_test::make_data({{1.0, 1.0}}),
                                                    400, t);
    CHECK(et.redraws > 50);
    CHECK(et.replications == 400);
}

TEST_CASE("bootstrap covariance dispatcher matches the direct engines") {
    RngStream data_rng(33);
    const auto x = uniform_sheet(60, 2, data_rng);
    const auto points = stdf_test::make_data({{1.0, 1.0}, {0.5, 1.5}});
    const double k = 12.0;
    const int B = 80;

    RngStream a(11), b(11);
    const auto via_dispatch = bootstrap_covariance(BootstrapMethod::Beta, x, k, points, B, a);
    const auto direct = beta_bootstrap_covariance(column_ranks(x), k, points, B, b);
    CHECK(via_dispatch.cov == direct.cov);

    RngStream g(12), h(12);
    const auto md = bootstrap_covariance(BootstrapMethod::Multiplier, x, k, points, B, g);
    const auto mdirect = multiplier_bootstrap_covariance(x, k, points, B, h);
    CHECK(md.cov == mdirect.cov);
}

TEST_CASE("bootstrap variances sit at the scale of the limit process") {
    // Clayton data: the true tail copula variances at these points are all
    // around 0.1, so grossly wrong scaling (a missing sqrt(k), say) would
    // land far outside [0.02, 0.4].
    RngStream data_rng(71);
    const auto x = sample(ClaytonModel{0.5}, 500, data_rng);
    const auto points = stdf_test::make_data(
        {{0.9238795325112867, 0.3826834323650898}, {0.7071067811865476, 0.7071067811865476}});
    const double k = 50.0;

    RngStream br(201);
    const auto beta = beta_bootstrap_covariance(column_ranks(x), k, points, 300, br);
    RngStream mr(202);
    const auto mult = multiplier_bootstrap_covariance(x, k, points, 300, mr);
    for (std::size_t qd : {std::size_t{0}, std::size_t{3}}) {
        CHECK(beta.cov[qd] > 0.02);
        CHECK(beta.cov[qd] < 0.4);
        CHECK(mult.cov[qd] > 0.02);
        CHECK(mult.cov[qd] < 0.4);
    }
}
