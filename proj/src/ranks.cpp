#include "stdf/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace stdf {

TiesDetected::TiesDetected(std::size_t column, double value)
    : std::runtime_error("ties detected in column " + std::to_string(column + 1) +
                         " at value " + std::to_string(value)),
      column_(column),
      value_(value) {}

TiesDetected::TiesDetected(const TiesDetected& other, const std::string& hint)
    : std::runtime_error(std::string(other.what()) + hint),
      column_(other.column_),
      value_(other.value_) {}

RankMatrix column_ranks(const DataMatrix& x) {
    if (x.rows == 0 || x.cols == 0)
        throw std::invalid_argument("column_ranks: empty matrix");
    for (double v : x.data)
        if (!std::isfinite(v)) throw std::invalid_argument("column_ranks: non-finite entry");

    RankMatrix r(x.rows, x.cols);
    std::vector<std::size_t> idx(x.rows);
    for (std::size_t j = 0; j < x.cols; ++j) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double va = x(a, j), vb = x(b, j);
            return va < vb || (va == vb && a < b);
        });
        for (std::size_t p = 0; p + 1 < x.rows; ++p)
            if (x(idx[p], j) == x(idx[p + 1], j)) throw TiesDetected(j, x(idx[p], j));
        for (std::size_t p = 0; p < x.rows; ++p) r(idx[p], j) = static_cast<int>(p + 1);
    }
    return r;
}

bool is_valid_rank_matrix(const RankMatrix& r) {
    if (r.rows == 0 || r.cols == 0) return false;
    std::vector<char> seen(r.rows);
    for (std::size_t j = 0; j < r.cols; ++j) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t i = 0; i < r.rows; ++i) {
            const int v = r(i, j);
            if (v < 1 || v > static_cast<int>(r.rows) || seen[v - 1]) return false;
            seen[v - 1] = 1;
        }
    }
    return true;
}

}  // namespace stdf
