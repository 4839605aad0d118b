#pragma once

#include <cstdio>
#include <string>

namespace evtail {

// printf-style formatting into a std::string; the toolchain's libstdc++ does
// not ship <format> yet.
template <typename... Args>
std::string strformat(const char* fmt, Args... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  if (n <= 0) return {};
  std::string s(static_cast<std::size_t>(n), '\0');
  std::snprintf(s.data(), s.size() + 1, fmt, args...);
  return s;
}

}  // namespace evtail
