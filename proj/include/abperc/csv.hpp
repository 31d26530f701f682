#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace abperc {

/// Locale-independent, round-trip formatting of reals for CSV output.
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

}  // namespace abperc
