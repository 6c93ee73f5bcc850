#include "prestamo/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace prestamo {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::int64_t to_hundredths(double value) {
  // The epsilon absorbs representation error in values such as 44.445.
  const double magnitude = std::floor(std::fabs(value) * 100.0 + 0.5 + 1e-9);
  const auto h = static_cast<std::int64_t>(magnitude);
  return value < 0 ? -h : h;
}

double round2(double value) {
  return static_cast<double>(to_hundredths(value)) / 100.0;
}

std::string format_fixed2(double value) {
  const std::int64_t h = to_hundredths(value);
  const std::int64_t mag = h < 0 ? -h : h;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", h < 0 ? "-" : "",
                static_cast<long long>(mag / 100),
                static_cast<long long>(mag % 100));
  return buf;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace prestamo
