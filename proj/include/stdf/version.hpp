#pragma once

namespace stdf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stdf
