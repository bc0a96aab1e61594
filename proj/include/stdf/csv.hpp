// Minimal numeric CSV I/O. Dialect: comma separator, LF line endings on
// output (CRLF tolerated on input), '.' decimal point independent of locale,
// UTF-8, header row always written on output.
#pragma once

#include <string>
#include <vector>

#include "stdf/matrix.hpp"

namespace stdf {

struct Csv {
    std::vector<std::string> header;  // empty if the file had none
    DataMatrix values;
};

// expect_header: when true the first row is treated as column names; when
// false every row must be numeric. Ragged rows and non-numeric cells raise
// std::runtime_error naming the offending line.
Csv read_csv(const std::string& path, bool expect_header = true);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const DataMatrix& values);

// Shortest round-trip decimal form (std::to_chars): reading the string back
// recovers the exact double, and the bytes are locale- and platform-stable.
std::string format_double(double x);

}  // namespace stdf
