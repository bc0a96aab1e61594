// Shared helpers for the unit tests: tiny matrix builders, a scratch
// directory, a KS statistic and a small symmetric eigensolver.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "stdf/matrix.hpp"

namespace stdf_test {

inline stdf::DataMatrix make_data(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("make_data: empty");
    stdf::DataMatrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

inline stdf::RankMatrix make_ranks(const std::vector<std::vector<int>>& rows) {
    if (rows.empty()) throw std::invalid_argument("make_ranks: empty");
    stdf::RankMatrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("stdf_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_file: cannot open " + path);
    out << content;
}

// Kolmogorov-Smirnov statistic of a sample against Uniform(0, 1).
inline double ks_uniform(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = double(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        d = std::max(d, v[i] - double(i) / n);
        d = std::max(d, double(i + 1) / n - v[i]);
    }
    return d;
}

// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi; fine for the
// small q x q covariance matrices in these tests).
inline double min_eigen_sym(std::vector<double> a, std::size_t q) {
    if (a.size() != q * q) throw std::invalid_argument("min_eigen_sym: size mismatch");
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < q; ++p)
            for (std::size_t r = p + 1; r < q; ++r) off += a[p * q + r] * a[p * q + r];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < q; ++p)
            for (std::size_t r = p + 1; r < q; ++r) {
                const double apr = a[p * q + r];
                if (std::abs(apr) < 1e-300) continue;
                const double app = a[p * q + p], arr = a[r * q + r];
                const double phi = 0.5 * std::atan2(2.0 * apr, arr - app);
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t t = 0; t < q; ++t) {
                    const double atp = a[t * q + p], atr = a[t * q + r];
                    a[t * q + p] = c * atp - s * atr;
                    a[t * q + r] = s * atp + c * atr;
                }
                for (std::size_t t = 0; t < q; ++t) {
                    const double apt = a[p * q + t], art = a[r * q + t];
                    a[p * q + t] = c * apt - s * art;
                    a[r * q + t] = s * apt + c * art;
                }
            }
    }
    double mn = a[0];
    for (std::size_t p = 1; p < q; ++p) mn = std::min(mn, a[p * q + p]);
    return mn;
}

}  // namespace stdf_test
