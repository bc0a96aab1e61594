#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "stdf/ranks.hpp"
#include "test_util.hpp"

using namespace stdf;
using stdf_test::make_data;
using stdf_test::make_ranks;

TEST_CASE("column ranks: sorted-position definition") {
    const auto r = column_ranks(make_data({{3.1}, {1.2}, {2.7}}));
    CHECK(r(0, 0) == 3);
    CHECK(r(1, 0) == 1);
    CHECK(r(2, 0) == 2);

    const auto id = column_ranks(make_data({{1.0}, {2.0}, {3.0}}));
    CHECK(id(0, 0) == 1);
    CHECK(id(1, 0) == 2);
    CHECK(id(2, 0) == 3);
}

TEST_CASE("column ranks: ties are a hard error carrying the location") {
    try {
        column_ranks(make_data({{5.0, 1.0}, {5.0, 2.0}}));
        FAIL("expected TiesDetected");
    } catch (const TiesDetected& e) {
        CHECK(e.column() == 0);
        CHECK(e.value() == 5.0);
    }
    // Ties in a later column only.
    try {
        column_ranks(make_data({{1.0, 4.0}, {2.0, 4.0}, {3.0, 5.0}}));
        FAIL("expected TiesDetected");
    } catch (const TiesDetected& e) {
        CHECK(e.column() == 1);
        CHECK(e.value() == 4.0);
    }
}

TEST_CASE("column ranks: invalid inputs") {
    DataMatrix empty;
    CHECK_THROWS_AS(column_ranks(empty), std::invalid_argument);
    CHECK_THROWS_AS(column_ranks(make_data({{1.0}, {std::nan("")}})), std::invalid_argument);
    CHECK_THROWS_AS(column_ranks(make_data({{1.0}, {1.0 / 0.0}})), std::invalid_argument);
}

TEST_CASE("ranks invariant under strictly increasing transforms") {
    const auto base = make_data({{0.3, -2.0}, {1.7, 0.4}, {-0.5, 3.3}, {0.9, -0.7}});
    const auto r0 = column_ranks(base);

    auto transformed = base;
    for (std::size_t i = 0; i < base.rows; ++i) {
        transformed(i, 0) = std::exp(base(i, 0));
        transformed(i, 1) = std::pow(base(i, 1), 3.0) + 10.0;
    }
    const auto r1 = column_ranks(transformed);
    CHECK(r0.data == r1.data);

    auto affine = base;
    for (auto& v : affine.data) v = 2.5 * v + 7.0;
    CHECK(column_ranks(affine).data == r0.data);
}

TEST_CASE("column sums equal n(n+1)/2 and validity check") {
    const auto r = column_ranks(make_data(
        {{0.1, 9.0, -3.0}, {4.2, 2.0, 5.5}, {1.3, 7.7, 0.2}, {2.4, 1.1, 8.8}, {3.5, 4.4, -1.0}}));
    for (std::size_t j = 0; j < r.cols; ++j) {
        int s = 0;
        for (std::size_t i = 0; i < r.rows; ++i) s += r(i, j);
        CHECK(s == 15);  // 5 * 6 / 2
    }
    CHECK(is_valid_rank_matrix(r));

    auto bad = make_ranks({{1, 1}, {2, 3}});
    CHECK_FALSE(is_valid_rank_matrix(bad));
    auto dup = make_ranks({{1}, {1}});
    CHECK_FALSE(is_valid_rank_matrix(dup));
    RankMatrix empty;
    CHECK_FALSE(is_valid_rank_matrix(empty));
}
