#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace ctax {

// Fixed six-decimal rendering, locale independent. Values that round to zero
// print without a sign so outputs do not flicker between 0 and -0.
inline std::string fixed6(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (std::abs(v) < 5e-7) v = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

}  // namespace ctax
