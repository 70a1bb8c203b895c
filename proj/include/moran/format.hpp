#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "moran/errors.hpp"

namespace moran {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw error(errc::io, "cannot format number");
  return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw error(errc::schema, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace moran
