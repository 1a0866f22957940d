#pragma once

#include <cstdio>
#include <string>

namespace imtrack {

// 12 significant digits, the precision used by every CSV export.
inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace imtrack
