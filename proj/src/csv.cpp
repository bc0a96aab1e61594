#include "stdf/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace stdf {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e && b != e;
}

}  // namespace

Csv read_csv(const std::string& path, bool expect_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("empty CSV file: " + path);

    Csv csv;
    std::size_t first_data = 0;
    if (expect_header) {
        csv.header = split_fields(lines[0]);
        first_data = 1;
        if (lines.size() == 1) throw std::runtime_error("CSV has a header but no data rows: " + path);
    }

    const std::size_t cols = split_fields(lines[first_data]).size();
    const std::size_t rows = lines.size() - first_data;
    csv.values = DataMatrix(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto fields = split_fields(lines[first_data + i]);
        if (fields.size() != cols) {
            std::ostringstream msg;
            msg << path << ": line " << (first_data + i + 1) << " has " << fields.size()
                << " fields, expected " << cols;
            throw std::runtime_error(msg.str());
        }
        for (std::size_t j = 0; j < cols; ++j) {
            double v;
            if (!parse_double(fields[j], v)) {
                std::ostringstream msg;
                msg << path << ": line " << (first_data + i + 1) << ", field " << (j + 1)
                    << ": not a number: '" << fields[j] << "'";
                throw std::runtime_error(msg.str());
            }
            csv.values(i, j) = v;
        }
    }
    return csv;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const DataMatrix& values) {
    if (!header.empty() && header.size() != values.cols)
        throw std::invalid_argument("write_csv: header width does not match matrix");
    std::ofstream out(path, std::ios::binary);  // binary: keep LF on every platform
    if (!out) throw std::runtime_error("cannot write CSV file: " + path);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out << ',';
            out << header[j];
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < values.rows; ++i) {
        for (std::size_t j = 0; j < values.cols; ++j) {
            if (j) out << ',';
            out << format_double(values(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failure on CSV file: " + path);
}

std::string format_double(double x) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, p);
}

}  // namespace stdf
