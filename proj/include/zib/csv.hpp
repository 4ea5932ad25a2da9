#pragma once

#include <cstdio>
#include <string>

namespace zib {

// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace zib
