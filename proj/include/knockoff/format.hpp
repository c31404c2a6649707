#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace knockoff {

/// Shortest decimal text that reads back to the same double; "inf"/"-inf"
/// for infinities.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace knockoff
