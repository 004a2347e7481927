#pragma once

#include <string_view>

namespace visgrade::dom {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// 2x3 affine matrix in SVG order:
///   | a c e |
///   | b d f |
struct Transform2D {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  static Transform2D identity() { return {}; }
  static Transform2D translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Transform2D scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  static Transform2D rotate(double degrees);

  Point apply(Point p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
  bool is_identity() const { return *this == Transform2D{}; }

  /// Average axis scale factor, used for radii.
  double mean_scale() const;

  friend bool operator==(const Transform2D&, const Transform2D&) = default;
};

/// Matrix product: (lhs * rhs).apply(p) == lhs.apply(rhs.apply(p)).
Transform2D operator*(const Transform2D& lhs, const Transform2D& rhs);

/// Parses an SVG transform list. The functions compose left to right, so
/// "translate(10 0) scale(2)" maps (5,5) to (20,10). Throws MalformedTransform.
Transform2D parse_transform(std::string_view attr);

}  // namespace visgrade::dom
