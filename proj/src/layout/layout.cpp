#include "visgrade/layout/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "visgrade/dom/axis.hpp"
#include "visgrade/dom/geometry.hpp"
#include "visgrade/dom/selector.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::layout {

using dom::AxisDirection;
using dom::AxisGeometry;
using dom::Point;

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
};

std::optional<double> length_attribute(const dom::ElementNode& n, std::string_view name) {
  const auto* raw = n.attribute(name);
  if (!raw) return std::nullopt;
  return text::parse_length(*raw);  // "100%" and friends count as absent
}

std::optional<std::array<double, 4>> view_box(const dom::ElementNode& svg) {
  const auto* raw = svg.attribute("viewBox");
  if (!raw) return std::nullopt;
  std::string normalized(*raw);
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::array<double, 4> out{};
  std::size_t count = 0;
  for (auto part : text::split(normalized, ' ')) {
    if (text::trim(part).empty()) continue;
    const auto v = text::parse_double(text::trim(part));
    if (!v || count == 4) return std::nullopt;
    out[count++] = *v;
  }
  if (count != 4) return std::nullopt;
  return out;
}

const dom::ElementNode* first_child_g(const dom::Document& doc, const dom::ElementNode& n) {
  for (auto id : n.children) {
    const auto& c = doc.node(id);
    if (c.tag == "g") return &c;
  }
  return nullptr;
}

/// Along-axis extent of an axis: its domain path when present, else ticks.
struct AxisSpan {
  Range span;
  Source source = Source::none;
};

AxisSpan span_of(const std::vector<AxisGeometry>& axes, AxisDirection dir) {
  AxisSpan domain{{}, Source::axis_domain};
  AxisSpan ticks{{}, Source::ticks};
  for (const auto& a : axes) {
    if (a.direction != dir) continue;
    const bool horizontal = dir == AxisDirection::horizontal;
    if (a.domain) {
      domain.span.add(horizontal ? a.domain->min.x : a.domain->min.y);
      domain.span.add(horizontal ? a.domain->max.x : a.domain->max.y);
    }
    for (const auto& t : a.ticks) ticks.span.add(horizontal ? t.position.x : t.position.y);
  }
  if (!domain.span.empty()) return domain;
  if (!ticks.span.empty()) return ticks;
  return {};
}

/// Largest origin y of the horizontal axes (a bottom axis sits at the
/// bottom of the plotting area).
std::optional<double> horizontal_baseline(const std::vector<AxisGeometry>& axes) {
  std::optional<double> best;
  for (const auto& a : axes) {
    if (a.direction != AxisDirection::horizontal) continue;
    best = best ? std::max(*best, a.origin.y) : a.origin.y;
  }
  return best;
}

Range content_bounds(const dom::Document& doc, const dom::ElementNode& scope,
                     const std::vector<AxisGeometry>& axes, bool horizontal) {
  Range r;
  for (const auto& n : doc.descendants(scope)) {
    bool in_axis = false;
    for (const auto& a : axes) in_axis = in_axis || a.group == &n || doc.is_ancestor(*a.group, n);
    if (in_axis || n.tag == "g" || n.tag == "text") continue;
    dom::ResolvedGeometry g;
    try {
      g = dom::resolve_geometry(doc, n);
    } catch (const Error&) {
      continue;
    }
    if (horizontal) {
      if (g.x) r.add(*g.x), r.add(*g.x + g.width.value_or(0));
      if (g.cx) r.add(*g.cx - g.r.value_or(0)), r.add(*g.cx + g.r.value_or(0));
      if (g.path_points) for (const auto& p : *g.path_points) r.add(p.x);
    } else {
      if (g.y) r.add(*g.y), r.add(*g.y + g.height.value_or(0));
      if (g.cy) r.add(*g.cy - g.r.value_or(0)), r.add(*g.cy + g.r.value_or(0));
      if (g.path_points) for (const auto& p : *g.path_points) r.add(p.y);
    }
  }
  return r;
}

void clamp_margin(LayoutReport& report, double& value, const char* name) {
  if (value >= 0) return;
  report.notes.push_back(fmt::format("Computed {} margin was negative ({}px); using 0px.", name,
                                     text::format_number(value)));
  value = 0;
  if (report.confidence == Confidence::explicit_translate) report.confidence = Confidence::inferred;
}

}  // namespace

std::string to_string(Confidence c) {
  switch (c) {
    case Confidence::explicit_translate: return "explicit";
    case Confidence::inferred: return "inferred";
    case Confidence::unknown: return "unknown";
  }
  return "?";
}

LayoutReport detect_layout(const dom::Document& doc, const rubric::StructureSpec& spec) {
  const auto svgs = dom::select(doc, spec.svg_selector);
  if (svgs.empty()) {
    throw NoSvgFound("no element matches '" + spec.svg_selector.expression() + "'");
  }
  if (svgs.size() > 1) throw MultipleSvg(svgs.size());
  const auto& svg = *svgs.front();

  LayoutReport report;
  const auto width_attr = length_attribute(svg, "width");
  const auto height_attr = length_attribute(svg, "height");
  const auto box = view_box(svg);
  if (width_attr || height_attr) report.size_source = Source::attribute;
  else if (box) report.size_source = Source::view_box;
  report.svg_width = width_attr.value_or(box ? (*box)[2] : 0);
  report.svg_height = height_attr.value_or(box ? (*box)[3] : 0);
  if (box && width_attr && height_attr &&
      (std::abs(*width_attr - (*box)[2]) > 1e-9 || std::abs(*height_attr - (*box)[3]) > 1e-9)) {
    report.notes.push_back(fmt::format(
        "The width/height attributes ({} x {}) and the viewBox ({} x {}) disagree; using the attributes.",
        text::format_number(*width_attr), text::format_number(*height_attr), text::format_number((*box)[2]),
        text::format_number((*box)[3])));
  }

  const Point svg_origin = dom::element_ctm(doc, svg).apply({0, 0});
  auto local = [&](Point p) { return Point{p.x - svg_origin.x, p.y - svg_origin.y}; };
  const double W = report.svg_width;
  const double H = report.svg_height;

  auto axes = dom::find_axes(doc, svg);
  for (auto& a : axes) {
    a.origin = local(a.origin);
    for (auto& t : a.ticks) t.position = local(t.position);
    if (a.domain) a.domain = dom::Extent{local(a.domain->min), local(a.domain->max)};
  }
  const auto h_span = span_of(axes, AxisDirection::horizontal);
  const auto v_span = span_of(axes, AxisDirection::vertical);
  auto& m = report.margins;

  const auto* margin_g = first_child_g(doc, svg);
  if (margin_g && margin_g->attribute("transform")) {
    report.confidence = Confidence::explicit_translate;
    report.origin_transform = dom::parent_ctm(doc, svg) * dom::parse_transform(*margin_g->attribute("transform"));
    const auto* inner = first_child_g(doc, *margin_g);
    const bool inner_is_axis =
        inner && std::any_of(axes.begin(), axes.end(), [&](const auto& a) { return a.group == inner; });
    if (inner && !inner_is_axis && inner->attribute("transform") && inner == &doc.node(margin_g->children.front())) {
      report.origin_transform = report.origin_transform * dom::parse_transform(*inner->attribute("transform"));
      report.notes.push_back(
          "Found nested translated <g> elements; margins are read from the outermost one.");
    }
    const Point o = local(dom::element_ctm(doc, *margin_g).apply({0, 0}));
    m.left = o.x;
    m.top = o.y;
    report.left_source = report.top_source = Source::translate;

    // Axis domain paths start at the origin (d3 adds a half-pixel offset),
    // so the span past the origin is the plotting size.
    double inner_w = W - m.left;
    if (h_span.source == Source::axis_domain) {
      inner_w = h_span.span.hi - o.x - std::max(0.0, h_span.span.lo - o.x);
      report.right_source = Source::axis_domain;
    } else if (h_span.source == Source::ticks) {
      inner_w = h_span.span.hi - o.x;
      report.right_source = Source::ticks;
    } else if (const auto r = content_bounds(doc, *margin_g, axes, true); !r.empty()) {
      inner_w = r.hi - o.x;
      report.right_source = Source::content_bounds;
    }
    m.right = W - m.left - inner_w;

    double inner_h = H - m.top;
    const auto baseline = horizontal_baseline(axes);
    if (v_span.source == Source::axis_domain) {
      inner_h = v_span.span.hi - o.y - std::max(0.0, v_span.span.lo - o.y);
      report.bottom_source = Source::axis_domain;
    } else if (baseline && *baseline - o.y > 0) {
      inner_h = *baseline - o.y;
      report.bottom_source = Source::axis_baseline;
    } else if (v_span.source == Source::ticks) {
      inner_h = v_span.span.hi - o.y;
      report.bottom_source = Source::ticks;
    } else if (const auto r = content_bounds(doc, *margin_g, axes, false); !r.empty()) {
      inner_h = r.hi - o.y;
      report.bottom_source = Source::content_bounds;
    }
    m.bottom = H - m.top - inner_h;
  } else if (h_span.source != Source::none || v_span.source != Source::none) {
    report.confidence = Confidence::inferred;
    if (h_span.source != Source::none) {
      m.left = h_span.span.lo;
      m.right = W - h_span.span.hi;
      report.left_source = report.right_source = h_span.source;
    }
    if (v_span.source != Source::none) {
      m.top = v_span.span.lo;
      m.bottom = H - v_span.span.hi;
      report.top_source = report.bottom_source = v_span.source;
    } else if (const auto baseline = horizontal_baseline(axes); baseline && *baseline > 0) {
      m.bottom = H - *baseline;
      report.bottom_source = Source::axis_baseline;
    }
  }

  clamp_margin(report, m.left, "left");
  clamp_margin(report, m.top, "top");
  clamp_margin(report, m.right, "right");
  clamp_margin(report, m.bottom, "bottom");
  report.inner_width = std::max(0.0, W - m.left - m.right);
  report.inner_height = std::max(0.0, H - m.top - m.bottom);
  if (report.confidence == Confidence::inferred && report.origin_transform.is_identity()) {
    report.origin_transform = dom::Transform2D::translate(m.left, m.top);
  }
  return report;
}

namespace {

std::string describe(Source s, Confidence c) {
  switch (s) {
    case Source::attribute: return "from width/height attributes";
    case Source::view_box: return "from viewBox";
    case Source::translate: return "from <g> translate";
    case Source::axis_domain: return "inferred from axis domain extent";
    case Source::axis_baseline: return "inferred from horizontal axis position";
    case Source::ticks: return "inferred from tick positions";
    case Source::content_bounds: return "inferred from content bounds";
    case Source::none: break;
  }
  return c == Confidence::unknown ? "unknown" : "not detected, assumed 0";
}

}  // namespace

std::vector<std::string> format_layout_advisory(const LayoutReport& r) {
  std::vector<std::string> lines;
  auto px = [](double v) { return text::format_number(v) + "px"; };
  if (r.size_source == Source::none) {
    lines.push_back("Could not detect the SVG size (no width/height attributes or viewBox).");
  } else {
    lines.push_back(fmt::format("Detected SVG size: {} x {} ({})", text::format_number(r.svg_width),
                                px(r.svg_height), describe(r.size_source, r.confidence)));
  }
  const std::pair<const char*, std::pair<double, Source>> margins[] = {
      {"left", {r.margins.left, r.left_source}},
      {"top", {r.margins.top, r.top_source}},
      {"right", {r.margins.right, r.right_source}},
      {"bottom", {r.margins.bottom, r.bottom_source}},
  };
  for (const auto& [name, value] : margins) {
    lines.push_back(fmt::format("Detected {} margin: {} ({})", name, px(value.first),
                                describe(value.second, r.confidence)));
  }
  lines.push_back(fmt::format("Plottable area: {} x {}", text::format_number(r.inner_width), px(r.inner_height)));
  lines.push_back("Layout detection confidence: " + to_string(r.confidence));
  if (r.confidence != Confidence::explicit_translate) {
    lines.push_back(fmt::format(
        "Could not find margins from a translated <g>. Consider the margin convention: append one <g> "
        "translated by the left and top margins and draw the chart inside it. See {}",
        kMarginConventionUrl));
  }
  for (const auto& note : r.notes) lines.push_back(note);
  return lines;
}

}  // namespace visgrade::layout
