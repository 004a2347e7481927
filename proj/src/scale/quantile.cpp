#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "visgrade/error.hpp"
#include "visgrade/scale/scale.hpp"
#include "visgrade/text.hpp"

namespace visgrade::scale {

std::vector<double> quantile_thresholds(std::vector<double> values, int k) {
  if (k < 1) throw std::invalid_argument("quantile count must be positive");
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  std::vector<double> out;
  for (int i = 1; i < k; ++i) {
    const double h = static_cast<double>(n - 1) * i / k;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double base = values[lo];
    out.push_back(lo + 1 < n ? base + (h - static_cast<double>(lo)) * (values[lo + 1] - base) : base);
  }
  return out;
}

std::size_t quantile_bucket(const std::vector<double>& thresholds, double value) {
  return static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), value) - thresholds.begin());
}

InferredScale infer_quantile_colors(const std::vector<double>& values, const std::vector<dom::Rgba>& colors, int k) {
  if (values.size() != colors.size()) throw std::invalid_argument("one color per value is required");
  if (values.empty()) throw InsufficientMarks("no marks to compare against the data");

  std::vector<dom::Rgba> distinct;
  for (const auto& c : colors) {
    if (std::find(distinct.begin(), distinct.end(), c) == distinct.end()) distinct.push_back(c);
  }
  if (distinct.size() != static_cast<std::size_t>(k)) throw WrongColorCount(distinct.size(), static_cast<std::size_t>(k));

  InferredScale s;
  s.kind = ScaleKind::quantile_color;
  s.orientation = Orientation::color;
  s.thresholds = quantile_thresholds(values, k);
  s.domain = {*std::min_element(values.begin(), values.end()), *std::max_element(values.begin(), values.end())};
  s.tick_count = values.size();

  // Per bucket: color -> (count, first appearance).
  std::vector<std::map<std::size_t, std::size_t>> votes(static_cast<std::size_t>(k));
  std::vector<std::size_t> bucket_of(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bucket_of[i] = quantile_bucket(s.thresholds, values[i]);
    const auto color_id = static_cast<std::size_t>(std::find(distinct.begin(), distinct.end(), colors[i]) - distinct.begin());
    ++votes[bucket_of[i]][color_id];
  }
  s.colors.assign(static_cast<std::size_t>(k), dom::Rgba{0, 0, 0, 0});
  std::vector<std::optional<std::size_t>> chosen(static_cast<std::size_t>(k));
  for (std::size_t b = 0; b < votes.size(); ++b) {
    std::size_t best_count = 0;
    for (const auto& [id, count] : votes[b]) {
      // Map keys are first-appearance order, so ties go to the earlier color.
      if (count > best_count) {
        best_count = count;
        chosen[b] = id;
      }
    }
    if (chosen[b]) s.colors[b] = distinct[*chosen[b]];
  }

  auto bucket_range = [&](std::size_t b) {
    const std::string lo = b == 0 ? "min" : text::format_exact(s.thresholds[b - 1]);
    const std::string hi = b == s.thresholds.size() ? "max" : text::format_exact(s.thresholds[b]);
    return fmt::format("[{}, {})", lo, hi);
  };

  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = bucket_of[i];
    if (colors[i] != s.colors[b]) {
      throw QuantileMismatch(fmt::format("datum {} (value {}) is {} but quantile {} {} uses {}", i,
                                         text::format_exact(values[i]), dom::to_string(colors[i]), b + 1,
                                         bucket_range(b), dom::to_string(s.colors[b])));
    }
  }
  for (std::size_t a = 0; a < chosen.size(); ++a) {
    for (std::size_t b = a + 1; b < chosen.size(); ++b) {
      if (chosen[a] && chosen[a] == chosen[b]) {
        throw QuantileMismatch(fmt::format("quantiles {} and {} share the color {}", a + 1, b + 1,
                                           dom::to_string(s.colors[a])));
      }
    }
  }
  return s;
}

dom::Rgba forward_color(const InferredScale& s, double value) {
  if (s.kind != ScaleKind::quantile_color) throw DomainViolation("forward_color() needs a quantile-color scale");
  return s.colors.at(quantile_bucket(s.thresholds, value));
}

}  // namespace visgrade::scale
