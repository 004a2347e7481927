#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers.
namespace visgrade::text {

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;

/// Whole-string parse; leading '+' allowed, no trailing garbage.
std::optional<double> parse_double(std::string_view s) noexcept;

/// Parses a length attribute: a number with an optional "px" suffix.
std::optional<double> parse_length(std::string_view s) noexcept;

/// Fixed-point with at most `max_decimals`, trailing zeros stripped: 40, 12.5, 0.333.
std::string format_number(double value, int max_decimals = 2);

/// Shortest representation that round-trips through parse_double.
std::string format_exact(double value);

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace visgrade::text
