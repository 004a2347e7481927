#pragma once

// Synthetic axis generator shared by the scale unit tests and the acceptance
// binary. Positions and labels are printed with shortest round-trip
// formatting, so the snapshot carries the generator's doubles exactly.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "visgrade/rubric/rubric.hpp"

namespace visgrade::synth {

struct GeneratedScale {
  rubric::ScaleKind kind = rubric::ScaleKind::linear;
  bool vertical = false;
  double d0 = 0, d1 = 1;  // domain
  double r0 = 0, r1 = 1;  // range, px
  std::vector<double> ticks;

  static double g(rubric::ScaleKind kind, double v) {
    switch (kind) {
      case rubric::ScaleKind::log: return std::log10(v);
      case rubric::ScaleKind::sqrt: return std::sqrt(v);
      default: return v;
    }
  }

  double position(double v) const {
    const double t = (g(kind, v) - g(kind, d0)) / (g(kind, d1) - g(kind, d0));
    return r0 + t * (r1 - r0);
  }

  // Value at fraction t of the transformed domain.
  double value_at(double t) const {
    const double a = g(kind, d0), b = g(kind, d1);
    const double x = a + t * (b - a);
    switch (kind) {
      case rubric::ScaleKind::log: return std::pow(10.0, x);
      case rubric::ScaleKind::sqrt: return x * x;
      default: return x;
    }
  }

  /// A d3-style axis group with id "axis" inside an svg.
  std::string render(double axis_offset = 0) const {
    std::string s = R"~(<svg width="1200" height="1200"><g transform="translate(40,20)">)~";
    s += vertical ? fmt::format(R"~(<g id="axis" transform="translate({},0)">)~", axis_offset)
                  : fmt::format(R"~(<g id="axis" transform="translate(0,{})">)~", axis_offset);
    for (double v : ticks) {
      const double p = position(v);
      s += vertical ? fmt::format(R"~(<g class="tick" transform="translate(0,{})"><line x2="-6"/><text x="-9">{}</text></g>)~", p, v)
                    : fmt::format(R"~(<g class="tick" transform="translate({},0)"><line y2="6"/><text y="9">{}</text></g>)~", p, v);
    }
    s += "</g></g></svg>";
    return s;
  }
};

/// Linear domains start at or below zero, sqrt domains at zero, and log
/// domains span one to four decades.
inline GeneratedScale random_scale(std::mt19937_64& rng, rubric::ScaleKind kind) {
  std::uniform_real_distribution<double> u(0, 1);
  GeneratedScale s;
  s.kind = kind;
  s.vertical = u(rng) < 0.5;
  const double span = 100 + 900 * u(rng);
  const double start = std::round(100 * u(rng));
  // Vertical axes usually run bottom to top.
  if (s.vertical) {
    s.r0 = start + span;
    s.r1 = start;
  } else {
    s.r0 = start;
    s.r1 = start + span;
  }
  const int n = 4 + static_cast<int>(rng() % 9);
  switch (kind) {
    case rubric::ScaleKind::log: {
      const double a = std::round(-2 + 5 * u(rng));
      const double decades = 1 + std::floor(4 * u(rng));
      s.d0 = std::pow(10.0, a);
      s.d1 = std::pow(10.0, a + decades);
      break;
    }
    case rubric::ScaleKind::sqrt:
      s.d0 = 0;
      s.d1 = std::round(1 + 1e5 * u(rng));
      break;
    default:
      s.d0 = -std::round(500 * u(rng));
      s.d1 = s.d0 + std::round(10 + 5000 * u(rng));
      break;
  }
  for (int i = 0; i < n; ++i) {
    const double v = i == 0 ? s.d0 : i == n - 1 ? s.d1 : s.value_at(static_cast<double>(i) / (n - 1));
    // Three significant digits, as axis labels would print.
    const double mag = v == 0 ? 1 : std::pow(10.0, std::floor(std::log10(std::abs(v))) - 2);
    s.ticks.push_back(i == 0 || i == n - 1 ? v : std::round(v / mag) * mag);
  }
  for (auto& v : s.ticks) v = std::stod(fmt::format("{}", v));
  return s;
}

}  // namespace visgrade::synth
