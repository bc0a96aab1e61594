// Dense row-major containers shared across the toolkit. Rows are
// observations, columns are margins.
#pragma once

#include <cstddef>
#include <vector>

namespace stdf {

struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DataMatrix() = default;
    DataMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }
};

// Column-wise ranks of a DataMatrix. Entries lie in 1..rows and every column
// is a permutation (ties are rejected upstream).
struct RankMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<int> data;

    RankMatrix() = default;
    RankMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

    int& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    int operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

}  // namespace stdf
