#pragma once

#include <cstdio>
#include <string>

namespace biharm::detail {

// Six significant digits, for diagnostics.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace biharm::detail
