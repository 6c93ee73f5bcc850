#ifndef PRESTAMO_FORMAT_HPP_
#define PRESTAMO_FORMAT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace prestamo {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

/// Value in hundredths, rounded half away from zero.
std::int64_t to_hundredths(double value);
double round2(double value);
/// Fixed two-decimal rendering of round2(value).
std::string format_fixed2(double value);

std::string_view trim(std::string_view text);

}  // namespace prestamo

#endif  // PRESTAMO_FORMAT_HPP_
