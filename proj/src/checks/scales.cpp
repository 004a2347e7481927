#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "visgrade/checks/checks.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::checks {

using rubric::ScaleKind;
using rubric::TimeUnit;
using scale::InferredScale;

namespace {

std::optional<double> parse_value(const std::string& label, ScaleKind kind) {
  return kind == ScaleKind::time ? scale::parse_date_label(label) : scale::parse_number_label(label);
}

std::string format_date(double ms, TimeUnit unit) {
  const auto d = scale::civil_from_epoch_ms(ms);
  if (unit == TimeUnit::year || (unit == TimeUnit::none && d.month == 1 && d.day == 1)) return fmt::format("{}", d.year);
  if (unit == TimeUnit::month || (unit == TimeUnit::none && d.day == 1)) return fmt::format("{}-{:02}", d.year, d.month);
  return fmt::format("{}-{:02}-{:02}", d.year, d.month, d.day);
}

std::string format_value(double v, ScaleKind kind, TimeUnit unit = TimeUnit::none) {
  return kind == ScaleKind::time ? format_date(v, unit) : text::format_exact(v);
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

// Whole units between two dates, or nullopt when `to` is not on a unit
// boundary.
std::optional<long> unit_steps(const scale::CivilDate& from, const scale::CivilDate& to, TimeUnit unit) {
  switch (unit) {
    case TimeUnit::year:
      if (to.month != 1 || to.day != 1) return std::nullopt;
      return to.year - from.year;
    case TimeUnit::month:
      if (to.day != 1) return std::nullopt;
      return (to.year - from.year) * 12L + static_cast<long>(to.month) - static_cast<long>(from.month);
    case TimeUnit::day:
      return std::lround((scale::epoch_ms(to) - scale::epoch_ms(from)) / 86'400'000.0);
    default:
      return std::nullopt;
  }
}

scale::CivilDate add_units(scale::CivilDate d, long n, TimeUnit unit) {
  switch (unit) {
    case TimeUnit::year: d.year += static_cast<int>(n); return d;
    case TimeUnit::month: {
      const long m = static_cast<long>(d.month) - 1 + n;
      d.year += static_cast<int>(std::floor(m / 12.0));
      d.month = static_cast<unsigned>(((m % 12) + 12) % 12) + 1;
      return d;
    }
    default: return scale::civil_from_epoch_ms(scale::epoch_ms(d) + static_cast<double>(n) * 86'400'000.0);
  }
}

std::string bracket(const std::vector<std::string>& items) { return fmt::format("[{}]", fmt::join(items, ", ")); }

}  // namespace

std::string describe_scale(const std::string& id, const InferredScale& s) {
  const auto kind = rubric::to_string(s.kind);
  if (s.kind == ScaleKind::band) {
    return fmt::format("scale '{}': {}, categories {} spaced {}px apart", id, kind, bracket(s.categories),
                       text::format_number(s.bandwidth_px));
  }
  if (s.kind == ScaleKind::quantile_color) {
    std::vector<std::string> t, c;
    for (double v : s.thresholds) t.push_back(text::format_number(v, 4));
    for (const auto& color : s.colors) c.push_back(dom::to_string(color));
    return fmt::format("scale '{}': {}, thresholds {}, colors {}", id, kind, bracket(t), bracket(c));
  }
  return fmt::format("scale '{}': {} ({}), domain [{}, {}] maps to [{}, {}]px (r² = {:.4f}, {} ticks)", id, kind,
                     rubric::to_string(s.orientation), format_value(s.domain[0], s.kind),
                     format_value(s.domain[1], s.kind), text::format_number(s.range_px[0]),
                     text::format_number(s.range_px[1]), s.fit_r2, s.tick_count);
}

CheckResult check_axis_ticks(const InferredScale& s, const rubric::AxisTicksCheck& spec) {
  struct Tick {
    double value;
    std::string label;
  };
  std::vector<Tick> ticks;
  for (const auto& t : s.ticks) {
    const auto v = s.kind == ScaleKind::time ? t.time_ms : t.number;
    if (v) ticks.push_back({*v, t.label});
  }
  std::stable_sort(ticks.begin(), ticks.end(), [](const Tick& a, const Tick& b) { return a.value < b.value; });
  std::vector<std::string> found;
  for (const auto& t : ticks) found.push_back(t.label);

  std::vector<double> expected_values;
  std::vector<std::string> expected;
  if (!spec.values.empty()) {
    for (const auto& label : spec.values) {
      const auto v = parse_value(label, s.kind);
      if (!v) throw DomainViolation("expected tick '" + label + "' is not a " + rubric::to_string(s.kind) + " value");
      expected_values.push_back(*v);
      expected.push_back(label);
    }
  } else if (ticks.size() >= 2 && spec.interval) {
    const double step = *spec.interval;
    if (s.kind == ScaleKind::time && spec.unit != TimeUnit::none) {
      const auto first = scale::civil_from_epoch_ms(ticks.front().value);
      const auto last = scale::civil_from_epoch_ms(ticks.back().value);
      const auto span = unit_steps(first, last, spec.unit).value_or(0);
      const auto n = static_cast<long>(step);
      for (long i = 0; i * n <= span && i < 1000; ++i) {
        expected_values.push_back(scale::epoch_ms(add_units(first, i * n, spec.unit)));
        expected.push_back(format_date(expected_values.back(), spec.unit));
      }
    } else {
      const double first = ticks.front().value, last = ticks.back().value;
      const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9));
      for (long i = 0; i <= count && i < 1000; ++i) {
        expected_values.push_back(first + static_cast<double>(i) * step);
        expected.push_back(format_value(expected_values.back(), s.kind, spec.unit));
      }
    }
  }

  bool ok = ticks.size() >= 2 && ticks.size() == expected_values.size();
  for (std::size_t i = 0; ok && i < ticks.size(); ++i) ok = close(ticks[i].value, expected_values[i]);
  // Civil units must also land on unit boundaries.
  if (ok && s.kind == ScaleKind::time && spec.unit != TimeUnit::none && spec.values.empty()) {
    const auto first = scale::civil_from_epoch_ms(ticks.front().value);
    for (const auto& t : ticks) ok = ok && unit_steps(first, scale::civil_from_epoch_ms(t.value), spec.unit);
  }

  std::vector<std::string> lines{fmt::format("Found ticks {}", bracket(found))};
  if (spec.interval) {
    lines.push_back(fmt::format("Expected a tick every {}{}", text::format_exact(*spec.interval),
                                spec.unit == TimeUnit::none ? "" : " " + rubric::to_string(spec.unit) + "(s)"));
  }
  if (ok) return pass(std::move(lines));
  lines.push_back(fmt::format("Found ticks {}, but expected {}", bracket(found), bracket(expected)));
  return fail(bracket(expected), bracket(found), std::move(lines));
}

std::vector<double> column_values(const rubric::Dataset& data, const std::string& field, ScaleKind kind) {
  const auto column = data.column_index(field);
  if (!column) throw DomainViolation("dataset has no field '" + field + "'");
  std::vector<double> out;
  for (std::size_t row = 0; row < data.row_count(); ++row) {
    const auto& cell = data.cell(row, *column);
    const auto v = parse_value(cell, kind);
    if (!v) {
      throw DomainViolation(fmt::format("row {}: {} value '{}' is not a {}", row + 1, field, cell,
                                        kind == ScaleKind::time ? "date" : "number"));
    }
    out.push_back(*v);
  }
  return out;
}

ScaleResolver::ScaleResolver(const dom::Document& doc, const rubric::RubricSpec& rubric) : doc_(doc), rubric_(rubric) {}

scale::FitOptions ScaleResolver::fit_options() const {
  scale::FitOptions o;
  o.min_r2 = rubric_.tolerances.fit_r2;
  o.max_residual_px = rubric_.tolerances.residual_px;
  o.band_tolerance_px = rubric_.tolerances.size_px;
  return o;
}

InferredScale ScaleResolver::fit(const rubric::ScaleSpec& spec) const {
  if (spec.kind == ScaleKind::quantile_color) return infer_color_encoding(doc_, rubric_, *spec.color, spec.color->k);
  return scale::infer_axis_scale(doc_, *spec.axis_group, spec.kind, spec.orientation, fit_options());
}

const InferredScale& ScaleResolver::get(const std::string& id) {
  if (auto it = fitted_.find(id); it != fitted_.end()) return it->second;
  if (auto it = failed_.find(id); it != failed_.end()) std::rethrow_exception(it->second);
  const auto* spec = rubric_.find_scale(id);
  if (!spec) throw DomainViolation("rubric declares no scale '" + id + "'");
  try {
    return fitted_.emplace(id, fit(*spec)).first->second;
  } catch (...) {
    failed_.emplace(id, std::current_exception());
    throw;
  }
}

InferredScale infer_color_encoding(const dom::Document& doc, const rubric::RubricSpec& rubric,
                                   const rubric::ColorEncoding& encoding, int k) {
  const auto* data = rubric.find_dataset(encoding.values.dataset);
  if (!data) throw DomainViolation("rubric declares no dataset '" + encoding.values.dataset + "'");
  const auto values = column_values(*data, encoding.values.field, ScaleKind::linear);

  const auto marks = graded_marks(doc, encoding.marks);
  std::vector<double> paired;
  std::vector<dom::Rgba> colors;
  if (encoding.join_attribute && encoding.join_field) {
    const auto key_column = data->column_index(*encoding.join_field);
    if (!key_column) throw DomainViolation("dataset has no field '" + *encoding.join_field + "'");
    for (const auto* mark : marks) {
      const auto key = dom::attribute_or_style(doc, *mark, *encoding.join_attribute);
      if (!key) continue;  // decorative mark
      std::optional<std::size_t> row;
      for (std::size_t r = 0; r < data->row_count() && !row; ++r) {
        if (text::trim(data->cell(r, *key_column)) == text::trim(*key)) row = r;
      }
      if (!row) {
        throw DomainViolation(fmt::format("mark with {}=\"{}\" has no row with {} = {}", *encoding.join_attribute,
                                          *key, *encoding.join_field, *key));
      }
      paired.push_back(values[*row]);
      colors.push_back(mark_color(doc, *mark, encoding.property));
    }
    if (paired.empty()) {
      throw InsufficientMarks(fmt::format("no mark selected by '{}' carries {}", encoding.marks.expression(),
                                          *encoding.join_attribute));
    }
  } else {
    if (marks.size() != values.size()) {
      throw InsufficientMarks(fmt::format("'{}' selected {} marks for {} data rows", encoding.marks.expression(),
                                          marks.size(), values.size()));
    }
    paired = values;
    for (const auto* mark : marks) colors.push_back(mark_color(doc, *mark, encoding.property));
  }
  return scale::infer_quantile_colors(paired, colors, k);
}

CheckResult check_scale(ScaleResolver& scales, const rubric::RubricSpec& rubric, const std::string& id) {
  const auto* spec = rubric.find_scale(id);
  if (!spec) throw DomainViolation("rubric declares no scale '" + id + "'");
  const auto kind = rubric::to_string(spec->kind);
  const InferredScale* fitted = nullptr;
  try {
    fitted = &scales.get(id);
  } catch (const PoorFit& e) {
    std::vector<std::string> lines{e.what()};
    if (spec->axis_group && spec->kind != ScaleKind::band) {
      try {
        const auto ticks = scale::extract_ticks(scales.document(), *spec->axis_group, spec->orientation);
        if (const auto best = scale::suggest_kind(ticks.samples); best && best->kind != spec->kind) {
          lines.push_back(fmt::format("Your axis looks more like a {} scale (r² = {:.4f})",
                                      rubric::to_string(best->kind), best->r2));
        }
      } catch (const Error&) {
      }
    }
    return fail(fmt::format("a {} scale (r² ≥ {})", kind, text::format_exact(scales.fit_options().min_r2)),
                fmt::format("r² = {:.4f}", e.r2()), std::move(lines));
  }

  const auto& s = *fitted;
  std::vector<std::string> lines{"Found " + describe_scale(id, s)};
  if (!spec->expected_domain || s.kind == ScaleKind::quantile_color) return pass(std::move(lines));
  const auto& ed = *spec->expected_domain;

  if (s.kind == ScaleKind::band) {
    std::vector<std::string> wanted;
    if (ed.from_dataset) {
      const auto* data = rubric.find_dataset(ed.from_dataset->dataset);
      if (!data) throw DomainViolation("rubric declares no dataset '" + ed.from_dataset->dataset + "'");
      std::set<std::string> seen;
      for (const auto& cell : data->column(ed.from_dataset->field)) {
        const std::string c(text::trim(cell));
        if (seen.insert(c).second) wanted.push_back(c);
      }
      std::vector<std::string> missing;
      for (const auto& c : wanted) {
        if (std::find(s.categories.begin(), s.categories.end(), c) == s.categories.end()) missing.push_back(c);
      }
      if (missing.empty()) return pass(std::move(lines));
      lines.push_back("Categories missing from the axis: " + bracket(missing));
      return fail("every category of " + ed.from_dataset->field + " on the axis", bracket(s.categories),
                  std::move(lines));
    }
    if (s.categories == ed.literal) return pass(std::move(lines));
    return fail(bracket(ed.literal), bracket(s.categories), std::move(lines));
  }

  if (ed.from_dataset) {
    const auto* data = rubric.find_dataset(ed.from_dataset->dataset);
    if (!data) throw DomainViolation("rubric declares no dataset '" + ed.from_dataset->dataset + "'");
    const auto values = column_values(*data, ed.from_dataset->field, s.kind);
    if (values.empty()) return pass(std::move(lines));
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    const auto expected = fmt::format("a domain covering the {} extent [{}, {}]", ed.from_dataset->field,
                                      format_value(lo, s.kind), format_value(hi, s.kind));
    const auto actual = fmt::format("[{}, {}]", format_value(s.domain[0], s.kind), format_value(s.domain[1], s.kind));
    try {
      scale::forward(s, lo);
      scale::forward(s, hi);
    } catch (const DomainViolation& e) {
      lines.push_back(e.what());
      return fail(expected, actual, std::move(lines));
    }
    return pass(std::move(lines));
  }

  // Literal [low, high]: both ends land on the drawn axis ends.
  const auto lo = parse_value(ed.literal.at(0), s.kind);
  const auto hi = parse_value(ed.literal.at(1), s.kind);
  if (!lo || !hi) throw DomainViolation("expected domain is not readable as " + kind + " values");
  const double tol = rubric.tolerances.position_px;
  const auto expected = fmt::format("domain [{}, {}] spanning the axis", ed.literal[0], ed.literal[1]);
  const auto actual = fmt::format("[{}, {}]", format_value(s.domain[0], s.kind), format_value(s.domain[1], s.kind));
  try {
    const double a = scale::forward(s, *lo).px, b = scale::forward(s, *hi).px;
    if (std::abs(a - s.range_px[0]) <= tol && std::abs(b - s.range_px[1]) <= tol) return pass(std::move(lines));
    lines.push_back(fmt::format("{} maps to {}px and {} to {}px; the axis runs from {}px to {}px", ed.literal[0],
                                text::format_number(a), ed.literal[1], text::format_number(b),
                                text::format_number(s.range_px[0]), text::format_number(s.range_px[1])));
  } catch (const DomainViolation& e) {
    lines.push_back(e.what());
  }
  return fail(expected, actual, std::move(lines));
}

}  // namespace visgrade::checks
