#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace therafuzz::detail {

/// Fixed two-decimal rendering used by every human-facing trace line.
inline std::string fixed2(double v) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string out(buf, n > 0 ? static_cast<std::size_t>(n) : 0);
  if (out == "-0.00") out = "0.00";
  return out;
}

/// Shortest text that reads back to exactly `v`.
inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  std::string out(buf, end);
  if (out == "-0") out = "0";
  return out;
}

inline std::optional<double> parse_double(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace therafuzz::detail
