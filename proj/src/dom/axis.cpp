#include "visgrade/dom/axis.hpp"

#include <algorithm>
#include <cmath>

#include "visgrade/dom/geometry.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {

namespace {

std::vector<const ElementNode*> element_children(const Document& doc, const ElementNode& n) {
  std::vector<const ElementNode*> out;
  for (auto id : n.children) out.push_back(&doc.node(id));
  return out;
}

const ElementNode* first_text(const Document& doc, const ElementNode& n) {
  if (n.tag == "text") return &n;
  for (const auto& d : doc.descendants(n)) {
    if (d.tag == "text") return &d;
  }
  return nullptr;
}

std::string label_of(const Document& doc, const ElementNode& n) {
  const auto* t = first_text(doc, n);
  return t ? std::string(text::trim(doc.text_content(*t))) : std::string();
}

Point text_position(const Document& doc, const ElementNode& t) {
  const auto geometry = resolve_geometry(doc, t);
  return {geometry.x.value_or(0), geometry.y.value_or(0)};
}

}  // namespace

AxisGeometry describe_axis(const Document& doc, const ElementNode& group) {
  AxisGeometry axis;
  axis.group = &group;
  const auto ctm = element_ctm(doc, group);
  axis.origin = ctm.apply({0, 0});

  const auto children = element_children(doc, group);
  for (const auto* c : children) {
    if (c->tag == "g" && c->has_class("tick")) {
      axis.ticks.push_back({c, element_ctm(doc, *c).apply({0, 0}), label_of(doc, *c)});
    }
  }
  if (axis.ticks.empty()) {
    for (const auto* c : children) {
      if (c->tag == "g" && c->attribute("transform") && first_text(doc, *c)) {
        axis.ticks.push_back({c, element_ctm(doc, *c).apply({0, 0}), label_of(doc, *c)});
      }
    }
  }
  if (axis.ticks.empty()) {
    for (const auto& d : doc.descendants(group)) {
      if (d.tag != "text") continue;
      try {
        axis.ticks.push_back({&d, text_position(doc, d), std::string(text::trim(doc.text_content(d)))});
      } catch (const NonNumericAttribute&) {
        // per-glyph position lists; not a usable tick
      }
    }
  }

  for (const auto* c : children) {
    if (c->tag != "path" || !c->has_class("domain")) continue;
    ResolvedGeometry geometry;
    try {
      geometry = resolve_geometry(doc, *c);
    } catch (const NonNumericAttribute&) {
      continue;
    }
    if (!geometry.path_points || geometry.path_points->empty()) continue;
    Extent e{geometry.path_points->front(), geometry.path_points->front()};
    for (const auto& p : *geometry.path_points) {
      e.min = {std::min(e.min.x, p.x), std::min(e.min.y, p.y)};
      e.max = {std::max(e.max.x, p.x), std::max(e.max.y, p.y)};
    }
    axis.domain = e;
    break;
  }

  if (axis.ticks.size() >= 2) {
    double min_x = axis.ticks[0].position.x, max_x = min_x;
    double min_y = axis.ticks[0].position.y, max_y = min_y;
    for (const auto& t : axis.ticks) {
      min_x = std::min(min_x, t.position.x);
      max_x = std::max(max_x, t.position.x);
      min_y = std::min(min_y, t.position.y);
      max_y = std::max(max_y, t.position.y);
    }
    const double spread_x = max_x - min_x;
    const double spread_y = max_y - min_y;
    if (spread_x > spread_y) axis.direction = AxisDirection::horizontal;
    if (spread_y > spread_x) axis.direction = AxisDirection::vertical;
  }
  if (axis.direction == AxisDirection::unknown && axis.domain) {
    const double w = axis.domain->max.x - axis.domain->min.x;
    const double h = axis.domain->max.y - axis.domain->min.y;
    if (w > h) axis.direction = AxisDirection::horizontal;
    if (h > w) axis.direction = AxisDirection::vertical;
  }
  return axis;
}

std::vector<AxisGeometry> find_axes(const Document& doc, const ElementNode& scope) {
  std::vector<AxisGeometry> axes;
  auto consider = [&](const ElementNode& n) {
    if (n.tag != "g") return;
    for (auto id : n.children) {
      const auto& c = doc.node(id);
      if ((c.tag == "g" && c.has_class("tick")) || (c.tag == "path" && c.has_class("domain"))) {
        axes.push_back(describe_axis(doc, n));
        return;
      }
    }
  };
  consider(scope);
  for (const auto& n : doc.descendants(scope)) consider(n);
  return axes;
}

}  // namespace visgrade::dom
