#pragma once

#include <cstdio>
#include <string>

namespace r2s {

// Shortest-form decimal with a fixed number of significant digits. Used for
// every float written to CSV so reruns are byte-comparable.
inline std::string format_sig(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

// Round-trip-exact form for mesh and grid dumps.
inline std::string format_exact(double v) { return format_sig(v, 17); }

}  // namespace r2s
