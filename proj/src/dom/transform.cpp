#include "visgrade/dom/transform.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {
using text::is_space;

Transform2D Transform2D::rotate(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  return {cs, sn, -sn, cs, 0, 0};
}

double Transform2D::mean_scale() const {
  return (std::hypot(a, b) + std::hypot(c, d)) / 2.0;
}

Transform2D operator*(const Transform2D& l, const Transform2D& r) {
  return {l.a * r.a + l.c * r.b,       l.b * r.a + l.d * r.b,
          l.a * r.c + l.c * r.d,       l.b * r.c + l.d * r.d,
          l.a * r.e + l.c * r.f + l.e, l.b * r.e + l.d * r.f + l.f};
}

namespace {

[[noreturn]] void malformed(std::string_view token, const std::string& why) {
  throw MalformedTransform(std::string(token), "malformed transform at '" + std::string(token) +
                                                   "': " + why);
}

std::vector<double> parse_args(std::string_view body, std::string_view token) {
  std::vector<double> args;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (is_space(body[i]) || body[i] == ',')) ++i;
    if (i >= body.size()) break;
    std::size_t j = i;
    // A sign only starts a new number at the beginning or after an exponent.
    while (j < body.size() && !is_space(body[j]) && body[j] != ',') {
      if ((body[j] == '-' || body[j] == '+') && j > i && body[j - 1] != 'e' && body[j - 1] != 'E') break;
      ++j;
    }
    const auto value = text::parse_double(body.substr(i, j - i));
    if (!value) malformed(token, "bad number '" + std::string(body.substr(i, j - i)) + "'");
    args.push_back(*value);
    i = j;
  }
  return args;
}

}  // namespace

Transform2D parse_transform(std::string_view attr) {
  Transform2D result;
  std::size_t i = 0;
  while (i < attr.size()) {
    while (i < attr.size() && (is_space(attr[i]) || attr[i] == ',')) ++i;
    if (i >= attr.size()) break;
    std::size_t name_end = i;
    while (name_end < attr.size() && std::isalpha(static_cast<unsigned char>(attr[name_end]))) ++name_end;
    const std::string_view name = attr.substr(i, name_end - i);
    std::size_t open = name_end;
    while (open < attr.size() && is_space(attr[open])) ++open;
    if (name.empty() || open >= attr.size() || attr[open] != '(') {
      malformed(attr.substr(i), "expected transform function");
    }
    const auto close = attr.find(')', open);
    if (close == std::string_view::npos) malformed(attr.substr(i), "missing ')'");
    const std::string_view token = attr.substr(i, close - i + 1);
    const auto args = parse_args(attr.substr(open + 1, close - open - 1), token);
    const auto n = args.size();

    Transform2D step;
    if (name == "translate") {
      if (n != 1 && n != 2) malformed(token, "translate takes 1 or 2 arguments");
      step = Transform2D::translate(args[0], n == 2 ? args[1] : 0.0);
    } else if (name == "scale") {
      if (n != 1 && n != 2) malformed(token, "scale takes 1 or 2 arguments");
      step = Transform2D::scale(args[0], n == 2 ? args[1] : args[0]);
    } else if (name == "rotate") {
      if (n != 1 && n != 3) malformed(token, "rotate takes 1 or 3 arguments");
      step = Transform2D::rotate(args[0]);
      if (n == 3) {
        step = Transform2D::translate(args[1], args[2]) * step *
               Transform2D::translate(-args[1], -args[2]);
      }
    } else if (name == "matrix") {
      if (n != 6) malformed(token, "matrix takes 6 arguments");
      step = {args[0], args[1], args[2], args[3], args[4], args[5]};
    } else if (name == "skewX" || name == "skewY") {
      if (n != 1) malformed(token, std::string(name) + " takes 1 argument");
      const double t = std::tan(args[0] * std::numbers::pi / 180.0);
      step = name == "skewX" ? Transform2D{1, 0, t, 1, 0, 0} : Transform2D{1, t, 0, 1, 0, 0};
    } else {
      malformed(token, "unknown function '" + std::string(name) + "'");
    }
    result = result * step;
    i = close + 1;
  }
  return result;
}

}  // namespace visgrade::dom
