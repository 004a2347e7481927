#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <fmt/format.h>

#include "visgrade/checks/checks.hpp"
#include "visgrade/dom/geometry.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::checks {

using rubric::ScaleKind;
using scale::InferredScale;

namespace {

bool is_horizontal(const InferredScale& s) { return s.orientation != rubric::Orientation::vertical; }

double axis_coord(const dom::Point& p, const InferredScale& s) { return is_horizontal(s) ? p.x : p.y; }

// Distance measured only along the bound axes.
double distance(const dom::Point& a, const dom::Point& b, const std::vector<AxisBinding>& bindings) {
  double sum = 0;
  for (const auto& binding : bindings) {
    const double d = axis_coord(a, *binding.scale) - axis_coord(b, *binding.scale);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double baseline_px(const InferredScale& s) {
  const double zero = std::clamp(s.kind == ScaleKind::log ? s.domain[0] : 0.0, s.domain[0], s.domain[1]);
  return scale::forward(s, zero).px;
}

std::string format_point(const dom::Point& p, const std::vector<AxisBinding>& bindings) {
  std::vector<std::string> parts;
  for (const auto& binding : bindings) parts.push_back(text::format_number(axis_coord(p, *binding.scale)));
  if (parts.size() == 1) return parts.front() + "px";
  return fmt::format("({})", fmt::join(parts, ", "));
}

std::string format_datum(const DatumMatch& d) {
  if (d.values.size() == 1) return d.values.front();
  return fmt::format("({})", fmt::join(d.values, ", "));
}

}  // namespace

std::vector<MarkPoint> mark_points(const dom::Document& doc, const dom::Selector& marks,
                                   const std::vector<AxisBinding>& bindings) {
  const auto nodes = graded_marks(doc, marks);
  std::vector<MarkPoint> out;
  if (nodes.size() == 1 && text::iequals(nodes.front()->tag, "path")) {
    const auto g = dom::resolve_geometry(doc, *nodes.front());
    if (g.path_points) {
      for (std::size_t i = 0; i < g.path_points->size(); ++i) out.push_back({nodes.front()->id, (*g.path_points)[i], i});
    }
    return out;
  }
  for (const auto* n : nodes) {
    const auto g = dom::resolve_geometry(doc, *n);
    dom::Point p;
    if (g.cx && g.cy) {
      p = {*g.cx, *g.cy};
    } else if (g.x && g.y && g.width && g.height) {
      p = {*g.x + *g.width / 2, *g.y + *g.height / 2};
      for (const auto& binding : bindings) {
        const auto& s = *binding.scale;
        if (s.kind == ScaleKind::band) continue;
        const double lo = is_horizontal(s) ? *g.x : *g.y;
        const double hi = lo + (is_horizontal(s) ? *g.width : *g.height);
        const double base = baseline_px(s);
        const double end = std::abs(hi - base) > std::abs(lo - base) ? hi : lo;
        (is_horizontal(s) ? p.x : p.y) = end;
      }
    } else if (g.x && g.y) {
      p = {*g.x, *g.y};
    } else {
      p = dom::element_ctm(doc, *n).apply({0, 0});
    }
    out.push_back({n->id, p, std::nullopt});
  }
  return out;
}

std::vector<DatumMatch> expected_positions(const rubric::Dataset& data, const std::vector<AxisBinding>& bindings) {
  std::vector<std::size_t> columns;
  for (const auto& binding : bindings) {
    const auto column = data.column_index(binding.field);
    if (!column) throw DomainViolation("dataset has no field '" + binding.field + "'");
    columns.push_back(*column);
  }
  std::vector<DatumMatch> out;
  for (std::size_t row = 0; row < data.row_count(); ++row) {
    DatumMatch d;
    d.row = row;
    for (std::size_t b = 0; b < bindings.size(); ++b) {
      const auto& s = *bindings[b].scale;
      const auto& cell = data.cell(row, columns[b]);
      d.values.push_back(cell);
      double px = 0;
      if (s.kind == ScaleKind::band) {
        px = scale::forward_band(s, text::trim(cell));
      } else {
        const auto v = s.kind == ScaleKind::time ? scale::parse_date_label(cell) : scale::parse_number_label(cell);
        if (!v) {
          throw DomainViolation(fmt::format("row {}: {} value '{}' is not a {}", row + 1, bindings[b].field, cell,
                                            s.kind == ScaleKind::time ? "date" : "number"));
        }
        try {
          px = scale::forward(s, *v).px;
        } catch (const DomainViolation& e) {
          throw DomainViolation(fmt::format("row {} ({} = {}): {}", row + 1, bindings[b].field, cell, e.what()));
        }
      }
      (is_horizontal(s) ? d.expected_px.x : d.expected_px.y) = px;
    }
    out.push_back(std::move(d));
  }
  return out;
}

void match_positions(std::vector<DatumMatch>& data, const std::vector<MarkPoint>& marks,
                     const std::vector<AxisBinding>& bindings, double tolerance_px) {
  struct Pair {
    double dist;
    std::size_t datum;
    double mx, my;
    std::size_t mark;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].mark.reset();
    data[i].nearest_mark.reset();
    data[i].distance_px = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < marks.size(); ++j) {
      const double dist = distance(data[i].expected_px, marks[j].px, bindings);
      data[i].distance_px = std::min(data[i].distance_px, dist);
      if (dist <= tolerance_px) pairs.push_back({dist, i, marks[j].px.x, marks[j].px.y, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.datum, a.mx, a.my) < std::tie(b.dist, b.datum, b.mx, b.my);
  });
  std::vector<bool> taken(marks.size(), false);
  for (const auto& p : pairs) {
    if (data[p.datum].mark || taken[p.mark]) continue;
    data[p.datum].mark = p.mark;
    data[p.datum].distance_px = p.dist;
    taken[p.mark] = true;
  }
  // Unmatched data report the nearest mark still free, if any.
  for (auto& d : data) {
    if (d.mark) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < marks.size(); ++j) {
      if (taken[j]) continue;
      const double dist = distance(d.expected_px, marks[j].px, bindings);
      if (dist < nearest) {
        nearest = dist;
        d.nearest_mark = j;
      }
    }
    if (std::isfinite(nearest)) d.distance_px = nearest;
  }
}

CheckResult check_positions(const dom::Document& doc, const dom::Selector& marks,
                            const std::vector<AxisBinding>& bindings, const rubric::Dataset& data,
                            const PositionsOptions& options) {
  std::vector<std::string> lines;
  for (const auto& binding : bindings) {
    lines.push_back("Assuming " + describe_scale(binding.scale_id, *binding.scale));
  }
  auto matches = expected_positions(data, bindings);
  const auto points = mark_points(doc, marks, bindings);
  match_positions(matches, points, bindings, options.tolerance_px);

  std::size_t matched = 0;
  for (const auto& m : matches) matched += m.mark ? 1 : 0;
  const std::size_t extra = points.size() - matched;

  CheckResult r;
  const std::size_t missing = matches.size() - matched;
  r.passed = missing == 0 && !(options.exact_count && extra > 0);
  lines.push_back(fmt::format("Matched {} of {} data points within {}px; {} mark{} selected by '{}'", matched,
                              matches.size(), text::format_number(options.tolerance_px), points.size(),
                              points.size() == 1 ? "" : "s", marks.expression()));
  for (const auto& m : matches) {
    if (m.mark) continue;
    std::string line = fmt::format("Missing datum {} (row {}): expected at {}", format_datum(m), m.row + 1,
                                   format_point(m.expected_px, bindings));
    if (m.nearest_mark) {
      line += fmt::format(", nearest mark is {}px away", text::format_number(m.distance_px));
      r.offenders.push_back(points[*m.nearest_mark].node);
    }
    lines.push_back(line);
  }
  if (extra > 0) {
    lines.push_back(fmt::format("{} {} mark{} matched no datum", options.exact_count ? "Error:" : "Warning:", extra,
                                extra == 1 ? "" : "s"));
    std::vector<bool> used(points.size(), false);
    for (const auto& m : matches) {
      if (m.mark) used[*m.mark] = true;
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (!used[j] && options.exact_count) r.offenders.push_back(points[j].node);
    }
  }
  const double total = static_cast<double>(matches.size() + (options.exact_count ? extra : 0));
  if (options.partial == rubric::PartialCredit::linear) {
    r.credit = total == 0 ? 1.0 : static_cast<double>(matched) / total;
  } else {
    r.credit = r.passed ? 1.0 : 0.0;
  }
  r.expected = fmt::format("{} marks at the positions computed from your axes{}", matches.size(),
                           options.exact_count ? " and no others" : "");
  r.actual = fmt::format("{} matched, {} missing, {} extra", matched, missing, extra);
  r.detail_lines = std::move(lines);
  return r;
}

}  // namespace visgrade::checks
