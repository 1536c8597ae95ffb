#pragma once

#include <charconv>
#include <string>

namespace btq {

// Shortest decimal representation that round-trips the double exactly; used
// for every number written to CSV and matrix dumps so that reruns are
// byte-identical.
inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace btq
