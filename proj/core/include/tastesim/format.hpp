#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace tastesim {

// Shortest decimal that parses back to the same double. NaN is written as an
// empty field (a missing value in the CSV outputs).
inline std::string format_double(double value) {
  if (std::isnan(value)) return {};
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

}  // namespace tastesim
