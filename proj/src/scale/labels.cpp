#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include "visgrade/scale/scale.hpp"
#include "visgrade/text.hpp"

namespace visgrade::scale {

namespace {

constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_digit(c)) return false;
  }
  return true;
}

constexpr std::array<std::string_view, 12> kMonths{"january", "february", "march",     "april",   "may",      "june",
                                                   "july",    "august",   "september", "october", "november", "december"};

std::optional<unsigned> month_from_name(std::string_view name) {
  const auto lower = text::to_lower(name);
  for (unsigned i = 0; i < kMonths.size(); ++i) {
    if (lower == kMonths[i] || (lower.size() == 3 && kMonths[i].substr(0, 3) == lower)) return i + 1;
  }
  return std::nullopt;
}

std::optional<double> make_date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) return std::nullopt;
  return epoch_ms({year, month, day});
}

}  // namespace

std::optional<double> parse_number_label(std::string_view label) {
  std::string s(text::trim(label));
  if (s.rfind(kUnicodeMinus, 0) == 0) s.replace(0, kUnicodeMinus.size(), "-");
  std::string_view v(s);

  double sign = 1;
  if (!v.empty() && (v.front() == '-' || v.front() == '+')) {
    if (v.front() == '-') sign = -1;
    v.remove_prefix(1);
  }

  double multiplier = 1;
  if (!v.empty()) {
    switch (v.back()) {
      case '%': multiplier = 0.01; break;
      case 'k': multiplier = 1e3; break;
      case 'M': multiplier = 1e6; break;
      case 'G': multiplier = 1e9; break;
      default: break;
    }
    if (multiplier != 1) v.remove_suffix(1);
  }

  const auto dot = v.find('.');
  std::string_view whole = v.substr(0, dot);
  const std::string_view fraction = dot == std::string_view::npos ? std::string_view{} : v.substr(dot + 1);
  if (dot != std::string_view::npos && !fraction.empty() && !all_digits(fraction)) return std::nullopt;
  if (whole.empty() && fraction.empty()) return std::nullopt;

  std::string digits;
  if (whole.find(',') != std::string_view::npos) {
    const auto groups = text::split(whole, ',');
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto g = groups[i];
      const bool ok = all_digits(g) && (i == 0 ? g.size() <= 3 : g.size() == 3);
      if (!ok) return std::nullopt;
      digits += g;
    }
  } else {
    if (!whole.empty() && !all_digits(whole)) return std::nullopt;
    digits = whole;
  }
  if (!fraction.empty()) digits += "." + std::string(fraction);
  const auto value = text::parse_double(digits.empty() ? "0" : digits);
  if (!value) return std::nullopt;
  return sign * *value * multiplier;
}

std::optional<double> parse_date_label(std::string_view label) {
  const auto s = text::trim(label);
  if (s.size() == 4 && all_digits(s)) return make_date(std::stoi(std::string(s)), 1, 1);
  if (s.size() == 7 && s[4] == '-' && all_digits(s.substr(0, 4)) && all_digits(s.substr(5, 2))) {
    return make_date(std::stoi(std::string(s.substr(0, 4))), static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2)))), 1);
  }
  if (s.size() == 10 && s[4] == '-' && s[7] == '-' && all_digits(s.substr(0, 4)) && all_digits(s.substr(5, 2)) &&
      all_digits(s.substr(8, 2))) {
    return make_date(std::stoi(std::string(s.substr(0, 4))), static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2)))),
                     static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2)))));
  }
  const auto space = s.find(' ');
  if (space != std::string_view::npos) {
    const auto year = text::trim(s.substr(space + 1));
    const auto month = month_from_name(s.substr(0, space));
    if (month && year.size() == 4 && all_digits(year)) return make_date(std::stoi(std::string(year)), *month, 1);
  }
  return std::nullopt;
}

double epoch_ms(const CivilDate& date) {
  const std::chrono::sys_days days{std::chrono::year{date.year} / std::chrono::month{date.month} /
                                   std::chrono::day{date.day}};
  return static_cast<double>(days.time_since_epoch().count()) * 86'400'000.0;
}

CivilDate civil_from_epoch_ms(double ms) {
  const auto days = static_cast<long>(std::floor(ms / 86'400'000.0));
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
}

}  // namespace visgrade::scale
