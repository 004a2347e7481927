#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "visgrade/dom/document.hpp"
#include "visgrade/dom/transform.hpp"

namespace visgrade::dom {

/// Element geometry in root pixel space, i.e. after every ancestor transform
/// and the element's own `transform`.
struct ResolvedGeometry {
  std::optional<double> x, y, width, height;
  std::optional<double> cx, cy, r;
  std::optional<std::vector<Point>> path_points;
};

/// Product of the transforms from the root down to and including `n`.
Transform2D element_ctm(const Document& doc, const ElementNode& n);

/// Product of the ancestors' transforms only (the coordinate system `n`'s
/// own `transform` attribute is expressed in).
Transform2D parent_ctm(const Document& doc, const ElementNode& n);

/// Rectangles resolve to the bounding box of their transformed corners;
/// circles and ellipses to a transformed center and scaled radius; paths,
/// lines, polylines and polygons to sampled points. Throws
/// NonNumericAttribute naming the offending attribute.
ResolvedGeometry resolve_geometry(const Document& doc, const ElementNode& n);

/// Samples path data in the path's own coordinates. Straight segments
/// contribute their end points; curves and arcs are flattened at parameter
/// steps of 0.1. Throws NonNumericAttribute("d") on malformed data.
std::vector<Point> sample_path(std::string_view d);

/// Numeric attribute value with an optional "px" unit, or nullopt when
/// absent. Throws NonNumericAttribute when present but not numeric.
std::optional<double> numeric_attribute(const ElementNode& n, std::string_view name);

}  // namespace visgrade::dom
