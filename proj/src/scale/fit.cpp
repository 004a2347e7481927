#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "visgrade/dom/axis.hpp"
#include "visgrade/error.hpp"
#include "visgrade/scale/scale.hpp"
#include "visgrade/text.hpp"

namespace visgrade::scale {

AxisTicks extract_ticks(const dom::Document& doc, const dom::Selector& axis_group, Orientation orientation) {
  const auto groups = dom::select(doc, axis_group);
  if (groups.empty()) throw AxisNotFound("no element matches '" + axis_group.expression() + "'");
  const auto axis = dom::describe_axis(doc, *groups.front());
  if (axis.ticks.empty()) throw NoTicks("axis '" + axis_group.expression() + "' has no ticks");

  AxisTicks out;
  out.orientation = orientation;
  if (orientation == Orientation::automatic || orientation == Orientation::color) {
    out.orientation = axis.direction == dom::AxisDirection::vertical ? Orientation::vertical : Orientation::horizontal;
  }
  const bool horizontal = out.orientation == Orientation::horizontal;
  for (const auto& t : axis.ticks) {
    TickSample s;
    s.position_px = horizontal ? t.position.x : t.position.y;
    s.label = t.label;
    s.number = parse_number_label(t.label);
    s.time_ms = parse_date_label(t.label);
    out.samples.push_back(std::move(s));
  }
  if (axis.domain) {
    out.extent_px = horizontal ? std::array{axis.domain->min.x, axis.domain->max.x}
                               : std::array{axis.domain->min.y, axis.domain->max.y};
  }
  return out;
}

std::optional<double> transform_value(ScaleKind kind, double v) {
  switch (kind) {
    case ScaleKind::log:
      if (!(v > 0)) return std::nullopt;
      return std::log10(v);
    case ScaleKind::sqrt:
      if (v < 0) return std::nullopt;
      return std::sqrt(v);
    default:
      return v;
  }
}

double inverse_transform(ScaleKind kind, double g) {
  switch (kind) {
    case ScaleKind::log: return std::pow(10.0, g);
    case ScaleKind::sqrt: return g < 0 ? 0 : g * g;
    default: return g;
  }
}

namespace {

struct Line {
  double slope = 0;
  double x_mean = 0;
  double y_mean = 0;
  double r2 = 0;
  double residual_max = 0;
};

Line least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  Line line;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    line.x_mean += xs[i];
    line.y_mean += ys[i];
  }
  line.x_mean /= n;
  line.y_mean /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - line.x_mean;
    const double dy = ys[i] - line.y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return line;  // degenerate: slope 0, r2 0
  line.slope = sxy / sxx;
  line.r2 = std::min(1.0, (sxy * sxy) / (sxx * syy));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double predicted = line.y_mean + line.slope * (xs[i] - line.x_mean);
    line.residual_max = std::max(line.residual_max, std::abs(ys[i] - predicted));
  }
  return line;
}

std::optional<double> sample_value(const TickSample& s, ScaleKind kind) {
  return kind == ScaleKind::time ? s.time_ms : s.number;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

InferredScale fit_band(const std::vector<TickSample>& samples, const FitOptions& options) {
  InferredScale s;
  s.kind = ScaleKind::band;
  std::set<std::string> seen;
  for (const auto& t : samples) {
    if (t.label.empty()) {
      ++s.unparsed_count;
      continue;
    }
    if (!seen.insert(t.label).second) {
      throw PoorFit(0, "band", "category '" + t.label + "' appears on more than one tick");
    }
    s.categories.push_back(t.label);
    s.band_centers_px.push_back(t.position_px);
    s.ticks.push_back(t);
  }
  s.tick_count = s.categories.size();
  if (s.categories.size() < 2) {
    throw InsufficientTicks(s.categories.size(), fmt::format("a band scale needs at least 2 labeled ticks, found {}",
                                                             s.categories.size()));
  }
  std::vector<double> spacing;
  for (std::size_t i = 1; i < s.band_centers_px.size(); ++i) {
    spacing.push_back(s.band_centers_px[i] - s.band_centers_px[i - 1]);
  }
  s.bandwidth_px = median(spacing);

  std::vector<double> index;
  for (std::size_t i = 0; i < s.band_centers_px.size(); ++i) index.push_back(static_cast<double>(i));
  const auto line = least_squares(index, s.band_centers_px);
  s.fit_r2 = s.band_centers_px.size() == 2 ? 1.0 : line.r2;
  s.slope = s.bandwidth_px;
  s.residual_max_px = 0;
  for (double d : spacing) s.residual_max_px = std::max(s.residual_max_px, std::abs(d - s.bandwidth_px));

  if (s.bandwidth_px == 0) throw PoorFit(s.fit_r2, "band", "band ticks do not advance along the axis");
  if (s.residual_max_px > options.band_tolerance_px) {
    throw PoorFit(s.fit_r2, "band",
                  fmt::format("band spacing is not uniform: spacing varies by {}px from the median {}px",
                              text::format_number(s.residual_max_px), text::format_number(s.bandwidth_px)));
  }
  s.range_px = {s.band_centers_px.front(), s.band_centers_px.back()};
  return s;
}

}  // namespace

InferredScale fit_scale(const std::vector<TickSample>& samples, ScaleKind kind, const FitOptions& options,
                        Orientation orientation) {
  if (kind == ScaleKind::quantile_color) {
    throw PoorFit(0, rubric::to_string(kind), "quantile-color scales are inferred from mark colors, not ticks");
  }
  if (kind == ScaleKind::band) {
    auto s = fit_band(samples, options);
    s.orientation = orientation;
    return s;
  }

  InferredScale s;
  s.kind = kind;
  s.orientation = orientation;
  std::vector<double> xs, ys;
  for (const auto& t : samples) {
    const auto v = sample_value(t, kind);
    if (!v) {
      ++s.unparsed_count;
      continue;
    }
    const auto g = transform_value(kind, *v);
    if (!g) {
      throw PoorFit(0, rubric::to_string(kind),
                    fmt::format("tick '{}' cannot appear on a {} scale", t.label, rubric::to_string(kind)));
    }
    xs.push_back(*g);
    ys.push_back(t.position_px);
    s.ticks.push_back(t);
  }
  s.tick_count = xs.size();
  if (2 * s.unparsed_count > samples.size()) {
    throw InsufficientTicks(xs.size(), fmt::format("{} of {} tick labels could not be read as {} values",
                                                   s.unparsed_count, samples.size(),
                                                   kind == ScaleKind::time ? "dates" : "numbers"));
  }
  if (xs.size() < 3) {
    throw InsufficientTicks(xs.size(), fmt::format("need at least 3 readable ticks, found {}", xs.size()));
  }
  if (std::set<double>(xs.begin(), xs.end()).size() < 2) {
    throw InsufficientTicks(1, "all readable ticks carry the same value");
  }

  const auto line = least_squares(xs, ys);
  s.slope = line.slope;
  s.x_mean = line.x_mean;
  s.y_mean = line.y_mean;
  s.intercept = line.y_mean - line.slope * line.x_mean;
  s.fit_r2 = line.r2;
  s.residual_max_px = line.residual_max;

  const auto kind_name = rubric::to_string(kind);
  if (s.slope == 0) throw PoorFit(s.fit_r2, kind_name, "tick positions do not change with their values");
  if (s.fit_r2 < options.min_r2) {
    throw PoorFit(s.fit_r2, kind_name,
                  fmt::format("tick positions do not follow a {} scale (r² = {:.4f}, need {})", kind_name,
                              s.fit_r2, text::format_exact(options.min_r2)));
  }
  if (s.residual_max_px > options.max_residual_px) {
    throw PoorFit(s.fit_r2, kind_name,
                  fmt::format("a tick is {}px away from where a {} scale would put it (allowed {}px)",
                              text::format_number(s.residual_max_px), kind_name,
                              text::format_number(options.max_residual_px)));
  }

  double lo = *sample_value(s.ticks.front(), kind), hi = lo;
  for (const auto& t : s.ticks) {
    lo = std::min(lo, *sample_value(t, kind));
    hi = std::max(hi, *sample_value(t, kind));
  }
  s.domain = {lo, hi};
  s.range_px = {forward(s, lo).px, forward(s, hi).px};
  return s;
}

void extend_to_axis_extent(InferredScale& s, std::array<double, 2> extent_px) {
  if (s.kind == ScaleKind::band || s.kind == ScaleKind::quantile_color || s.slope == 0) return;
  for (double px : extent_px) {
    const double g = s.x_mean + (px - s.y_mean) / s.slope;
    const double v = inverse_transform(s.kind, g);
    if (s.kind == ScaleKind::log && !(v > 0)) continue;
    s.domain[0] = std::min(s.domain[0], v);
    s.domain[1] = std::max(s.domain[1], v);
  }
  s.range_px = {forward(s, s.domain[0]).px, forward(s, s.domain[1]).px};
}

InferredScale infer_axis_scale(const dom::Document& doc, const dom::Selector& axis_group, ScaleKind kind,
                               Orientation orientation, const FitOptions& options) {
  const auto ticks = extract_ticks(doc, axis_group, orientation);
  auto s = fit_scale(ticks.samples, kind, options, ticks.orientation);
  if (ticks.extent_px) extend_to_axis_extent(s, *ticks.extent_px);
  return s;
}

std::optional<KindSuggestion> suggest_kind(const std::vector<TickSample>& samples) {
  std::optional<KindSuggestion> best;
  for (auto kind : {ScaleKind::linear, ScaleKind::log, ScaleKind::sqrt, ScaleKind::time}) {
    std::vector<double> xs, ys;
    bool usable = true;
    for (const auto& t : samples) {
      const auto v = sample_value(t, kind);
      if (!v) continue;
      const auto g = transform_value(kind, *v);
      if (!g) {
        usable = false;
        break;
      }
      xs.push_back(*g);
      ys.push_back(t.position_px);
    }
    if (!usable || xs.size() < 3) continue;
    const auto line = least_squares(xs, ys);
    if (line.slope == 0) continue;
    if (!best || line.r2 > best->r2) best = KindSuggestion{kind, line.r2};
  }
  return best;
}

Projection forward(const InferredScale& s, double value) {
  if (s.kind == ScaleKind::band || s.kind == ScaleKind::quantile_color) {
    throw DomainViolation("forward() needs a continuous scale");
  }
  const auto g = transform_value(s.kind, value);
  if (!g || !std::isfinite(value)) {
    throw DomainViolation(fmt::format("value {} is outside the {} scale's domain", text::format_exact(value),
                                      rubric::to_string(s.kind)));
  }
  const double g_lo = *transform_value(s.kind, s.domain[0]);
  const double g_hi = *transform_value(s.kind, s.domain[1]);
  const double allowance = kExtrapolationAllowance * (g_hi - g_lo);
  if (*g < g_lo - allowance || *g > g_hi + allowance) {
    throw DomainViolation(fmt::format("value {} is outside the axis domain [{}, {}]", text::format_exact(value),
                                      text::format_exact(s.domain[0]), text::format_exact(s.domain[1])));
  }
  return {s.y_mean + s.slope * (*g - s.x_mean), *g < g_lo || *g > g_hi};
}

double forward_band(const InferredScale& s, std::string_view category) {
  for (std::size_t i = 0; i < s.categories.size(); ++i) {
    if (s.categories[i] == category) return s.band_centers_px[i];
  }
  throw UnknownCategory("category '" + std::string(category) + "' is not on the axis");
}

}  // namespace visgrade::scale
