#include "visgrade/dom/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {

std::optional<double> numeric_attribute(const ElementNode& n, std::string_view name) {
  const auto* raw = n.attribute(name);
  if (!raw) return std::nullopt;
  const auto value = text::parse_length(*raw);
  if (!value) throw NonNumericAttribute(std::string(name), *raw);
  return value;
}

namespace {

Transform2D own_transform(const ElementNode& n) {
  const auto* attr = n.attribute("transform");
  return attr ? parse_transform(*attr) : Transform2D::identity();
}

class PathSampler {
 public:
  explicit PathSampler(std::string_view d) : d_(d) {}

  std::vector<Point> run() {
    char command = 0;
    while (true) {
      skip_separators();
      if (pos_ >= d_.size()) break;
      const char c = d_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c))) {
        command = c;
        ++pos_;
        if (command == 'Z' || command == 'z') {
          current_ = subpath_start_;
          last_control_.reset();
          continue;
        }
      } else if (command == 0) {
        fail();
      }
      step(command);
      // Implicit repetition: extra coordinate pairs after M are line-tos.
      if (command == 'M') command = 'L';
      if (command == 'm') command = 'l';
    }
    return std::move(points_);
  }

 private:
  [[noreturn]] void fail() const { throw NonNumericAttribute("d", std::string(d_)); }

  void skip_separators() {
    while (pos_ < d_.size() && (text::is_space(d_[pos_]) || d_[pos_] == ',')) ++pos_;
  }

  double number() {
    skip_separators();
    const auto start = pos_;
    if (pos_ < d_.size() && (d_[pos_] == '+' || d_[pos_] == '-')) ++pos_;
    bool seen_dot = false;
    bool digits = false;
    while (pos_ < d_.size()) {
      const char c = d_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = true;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (digits && pos_ < d_.size() && (d_[pos_] == 'e' || d_[pos_] == 'E')) {
      auto save = pos_++;
      if (pos_ < d_.size() && (d_[pos_] == '+' || d_[pos_] == '-')) ++pos_;
      if (pos_ < d_.size() && std::isdigit(static_cast<unsigned char>(d_[pos_]))) {
        while (pos_ < d_.size() && std::isdigit(static_cast<unsigned char>(d_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    if (!digits) fail();
    const auto value = text::parse_double(d_.substr(start, pos_ - start));
    if (!value) fail();
    return *value;
  }

  bool flag() {
    skip_separators();
    if (pos_ >= d_.size() || (d_[pos_] != '0' && d_[pos_] != '1')) fail();
    return d_[pos_++] == '1';
  }

  Point point(bool relative) {
    const double x = number();
    const double y = number();
    return relative ? Point{current_.x + x, current_.y + y} : Point{x, y};
  }

  void emit(Point p) { points_.push_back(p); }

  void cubic(Point p0, Point c1, Point c2, Point p3) {
    for (int i = 1; i <= 10; ++i) {
      const double t = i / 10.0;
      const double u = 1 - t;
      emit({u * u * u * p0.x + 3 * u * u * t * c1.x + 3 * u * t * t * c2.x + t * t * t * p3.x,
            u * u * u * p0.y + 3 * u * u * t * c1.y + 3 * u * t * t * c2.y + t * t * t * p3.y});
    }
  }

  void quadratic(Point p0, Point c, Point p2) {
    for (int i = 1; i <= 10; ++i) {
      const double t = i / 10.0;
      const double u = 1 - t;
      emit({u * u * p0.x + 2 * u * t * c.x + t * t * p2.x,
            u * u * p0.y + 2 * u * t * c.y + t * t * p2.y});
    }
  }

  // Endpoint-to-center conversion for elliptical arcs.
  void arc(Point p0, double rx, double ry, double phi_deg, bool large, bool sweep, Point p1) {
    if (p0 == p1) return;
    rx = std::abs(rx);
    ry = std::abs(ry);
    if (rx == 0 || ry == 0) {
      emit(p1);
      return;
    }
    const double phi = phi_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(phi);
    const double sn = std::sin(phi);
    const double dx = (p0.x - p1.x) / 2;
    const double dy = (p0.y - p1.y) / 2;
    const double x1 = cs * dx + sn * dy;
    const double y1 = -sn * dx + cs * dy;
    const double lambda = (x1 * x1) / (rx * rx) + (y1 * y1) / (ry * ry);
    if (lambda > 1) {
      rx *= std::sqrt(lambda);
      ry *= std::sqrt(lambda);
    }
    const double num = rx * rx * ry * ry - rx * rx * y1 * y1 - ry * ry * x1 * x1;
    const double den = rx * rx * y1 * y1 + ry * ry * x1 * x1;
    double coef = den == 0 ? 0 : std::sqrt(std::max(0.0, num / den));
    if (large == sweep) coef = -coef;
    const double cxp = coef * rx * y1 / ry;
    const double cyp = -coef * ry * x1 / rx;
    const double cx = cs * cxp - sn * cyp + (p0.x + p1.x) / 2;
    const double cy = sn * cxp + cs * cyp + (p0.y + p1.y) / 2;
    auto angle = [](double ux, double uy, double vx, double vy) {
      return std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
    };
    const double theta = angle(1, 0, (x1 - cxp) / rx, (y1 - cyp) / ry);
    double delta = angle((x1 - cxp) / rx, (y1 - cyp) / ry, (-x1 - cxp) / rx, (-y1 - cyp) / ry);
    if (!sweep && delta > 0) delta -= 2 * std::numbers::pi;
    if (sweep && delta < 0) delta += 2 * std::numbers::pi;
    for (int i = 1; i <= 10; ++i) {
      const double t = theta + delta * i / 10.0;
      if (i == 10) {
        emit(p1);
      } else {
        emit({cx + rx * std::cos(t) * cs - ry * std::sin(t) * sn,
              cy + rx * std::cos(t) * sn + ry * std::sin(t) * cs});
      }
    }
  }

  void step(char command) {
    const bool rel = std::islower(static_cast<unsigned char>(command));
    const Point start = current_;
    std::optional<Point> control;
    switch (std::toupper(static_cast<unsigned char>(command))) {
      case 'M':
        current_ = subpath_start_ = point(rel);
        emit(current_);
        break;
      case 'L':
        current_ = point(rel);
        emit(current_);
        break;
      case 'H': {
        const double x = number();
        current_.x = rel ? current_.x + x : x;
        emit(current_);
        break;
      }
      case 'V': {
        const double y = number();
        current_.y = rel ? current_.y + y : y;
        emit(current_);
        break;
      }
      case 'C': {
        const Point c1 = point(rel);
        const Point c2 = point(rel);
        const Point end = point(rel);
        cubic(start, c1, c2, end);
        current_ = end;
        control = c2;
        break;
      }
      case 'S': {
        const Point c1 = last_cubic_ ? Point{2 * start.x - last_control_->x, 2 * start.y - last_control_->y}
                                     : start;
        const Point c2 = point(rel);
        const Point end = point(rel);
        cubic(start, c1, c2, end);
        current_ = end;
        control = c2;
        break;
      }
      case 'Q': {
        const Point c = point(rel);
        const Point end = point(rel);
        quadratic(start, c, end);
        current_ = end;
        control = c;
        break;
      }
      case 'T': {
        const Point c = (!last_cubic_ && last_control_)
                            ? Point{2 * start.x - last_control_->x, 2 * start.y - last_control_->y}
                            : start;
        const Point end = point(rel);
        quadratic(start, c, end);
        current_ = end;
        control = c;
        break;
      }
      case 'A': {
        const double rx = number();
        const double ry = number();
        const double rotation = number();
        const bool large = flag();
        const bool sweep = flag();
        const Point end = point(rel);
        arc(start, rx, ry, rotation, large, sweep, end);
        current_ = end;
        break;
      }
      default:
        fail();
    }
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(command)));
    last_cubic_ = upper == 'C' || upper == 'S';
    last_control_ = control;
  }

  std::string_view d_;
  std::size_t pos_ = 0;
  Point current_;
  Point subpath_start_;
  std::optional<Point> last_control_;
  bool last_cubic_ = false;
  std::vector<Point> points_;
};

std::vector<Point> parse_points_list(const ElementNode& n) {
  const auto* raw = n.attribute("points");
  if (!raw) return {};
  std::vector<double> values;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    const auto v = text::parse_double(token);
    if (!v) throw NonNumericAttribute("points", *raw);
    values.push_back(*v);
    token.clear();
  };
  for (char c : *raw) {
    if (text::is_space(c) || c == ',') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (values.size() % 2 != 0) throw NonNumericAttribute("points", *raw);
  std::vector<Point> points;
  for (std::size_t i = 0; i < values.size(); i += 2) points.push_back({values[i], values[i + 1]});
  return points;
}

}  // namespace

Transform2D parent_ctm(const Document& doc, const ElementNode& n) {
  Transform2D ctm;
  for (const auto* a : doc.ancestors(n)) ctm = ctm * own_transform(*a);
  return ctm;
}

Transform2D element_ctm(const Document& doc, const ElementNode& n) {
  return parent_ctm(doc, n) * own_transform(n);
}

std::vector<Point> sample_path(std::string_view d) { return PathSampler(d).run(); }

ResolvedGeometry resolve_geometry(const Document& doc, const ElementNode& n) {
  const Transform2D ctm = element_ctm(doc, n);
  ResolvedGeometry g;
  const std::string tag = text::to_lower(n.tag);

  auto transform_all = [&](std::vector<Point> points) {
    for (auto& p : points) p = ctm.apply(p);
    return points;
  };

  if (tag == "circle" || tag == "ellipse") {
    const Point c = ctm.apply({numeric_attribute(n, "cx").value_or(0.0),
                               numeric_attribute(n, "cy").value_or(0.0)});
    g.cx = c.x;
    g.cy = c.y;
    std::optional<double> radius = numeric_attribute(n, "r");
    if (!radius) {
      const auto rx = numeric_attribute(n, "rx");
      const auto ry = numeric_attribute(n, "ry");
      if (rx && ry) radius = (*rx + *ry) / 2;
      else if (rx) radius = rx;
      else if (ry) radius = ry;
    }
    if (radius) g.r = *radius * ctm.mean_scale();
    return g;
  }

  if (tag == "path") {
    if (const auto* d = n.attribute("d")) g.path_points = transform_all(sample_path(*d));
    return g;
  }
  if (tag == "line") {
    g.path_points = transform_all({{numeric_attribute(n, "x1").value_or(0.0),
                                    numeric_attribute(n, "y1").value_or(0.0)},
                                   {numeric_attribute(n, "x2").value_or(0.0),
                                    numeric_attribute(n, "y2").value_or(0.0)}});
    return g;
  }
  if (tag == "polyline" || tag == "polygon") {
    g.path_points = transform_all(parse_points_list(n));
    return g;
  }

  const bool defaults_to_origin = tag == "rect" || tag == "image" || tag == "use" ||
                                  tag == "text" || tag == "foreignobject";
  auto x = numeric_attribute(n, "x");
  auto y = numeric_attribute(n, "y");
  const auto width = numeric_attribute(n, "width");
  const auto height = numeric_attribute(n, "height");
  if (defaults_to_origin) {
    x = x.value_or(0.0);
    y = y.value_or(0.0);
  }
  if (x || y) {
    const double x0 = x.value_or(0.0);
    const double y0 = y.value_or(0.0);
    const double w = width.value_or(0.0);
    const double h = height.value_or(0.0);
    const Point corners[4] = {ctm.apply({x0, y0}), ctm.apply({x0 + w, y0}),
                              ctm.apply({x0, y0 + h}), ctm.apply({x0 + w, y0 + h})};
    double min_x = corners[0].x, max_x = corners[0].x, min_y = corners[0].y, max_y = corners[0].y;
    for (const auto& p : corners) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    if (x) g.x = min_x;
    if (y) g.y = min_y;
    if (width) g.width = max_x - min_x;
    if (height) g.height = max_y - min_y;
  } else {
    if (width) g.width = *width * std::hypot(ctm.a, ctm.b);
    if (height) g.height = *height * std::hypot(ctm.c, ctm.d);
  }
  if (const auto cx = numeric_attribute(n, "cx")) g.cx = ctm.apply({*cx, 0}).x;
  if (const auto cy = numeric_attribute(n, "cy")) g.cy = ctm.apply({0, *cy}).y;
  if (const auto r = numeric_attribute(n, "r")) g.r = *r * ctm.mean_scale();
  return g;
}

}  // namespace visgrade::dom
