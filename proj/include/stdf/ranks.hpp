// Column-wise ranking with explicit tie detection.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "stdf/matrix.hpp"

namespace stdf {

// Raised when a column contains an exact duplicate. Ranks of tied data are
// ill-defined for the rank-based estimators; callers decide whether to jitter
// and retry.
class TiesDetected : public std::runtime_error {
public:
    TiesDetected(std::size_t column, double value);
    TiesDetected(const TiesDetected& other, const std::string& hint);
    std::size_t column() const { return column_; }
    double value() const { return value_; }

private:
    std::size_t column_;
    double value_;
};

// Ranks each column of x (1 = smallest). Throws TiesDetected on duplicates
// and std::invalid_argument on an empty matrix or non-finite entries.
RankMatrix column_ranks(const DataMatrix& x);

// True when every column of r is a permutation of 1..rows.
bool is_valid_rank_matrix(const RankMatrix& r);

}  // namespace stdf
