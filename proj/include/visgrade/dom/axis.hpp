#pragma once

#include <optional>
#include <string>
#include <vector>

#include "visgrade/dom/document.hpp"
#include "visgrade/dom/transform.hpp"

namespace visgrade::dom {

enum class AxisDirection { horizontal, vertical, unknown };

struct TickMark {
  const ElementNode* node = nullptr;
  Point position;     // root pixel space
  std::string label;  // trimmed text content
};

struct Extent {
  Point min;
  Point max;
};

/// What an axis group looks like once resolved to root pixel space.
struct AxisGeometry {
  const ElementNode* group = nullptr;
  Point origin;
  std::vector<TickMark> ticks;  // document order
  std::optional<Extent> domain;  // bounds of the `path.domain` child
  AxisDirection direction = AxisDirection::unknown;
};

/// Ticks are child `g.tick` elements; failing that, child `g` elements with a
/// transform and a text label; failing that, descendant text elements placed
/// at their resolved (x, y).
AxisGeometry describe_axis(const Document& doc, const ElementNode& group);

/// Every `g` under `scope` that has a `.tick` child or a `path.domain` child,
/// in document order.
std::vector<AxisGeometry> find_axes(const Document& doc, const ElementNode& scope);

}  // namespace visgrade::dom
