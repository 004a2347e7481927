#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "visgrade/checks/checks.hpp"
#include "visgrade/dom/color.hpp"
#include "visgrade/dom/geometry.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::checks {

using rubric::SortAxis;

namespace {

std::string describe_mark(const dom::ElementNode& n) {
  std::string s = "<" + n.tag;
  if (!n.element_id().empty()) s += " id=\"" + std::string(n.element_id()) + "\"";
  return s + ">";
}

std::string format_list(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(text::format_number(v));
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

}  // namespace

double mark_value(const dom::Document& doc, const dom::ElementNode& mark, const std::string& key, bool vertical_bars) {
  if (key == "length" || key == "thickness") {
    const auto g = dom::resolve_geometry(doc, mark);
    if (!g.width || !g.height) throw NonNumericAttribute(key, "(" + mark.tag + " has no width and height)");
    const bool along_height = (key == "length") == vertical_bars;
    return along_height ? *g.height : *g.width;
  }
  const auto raw = dom::attribute_or_style(doc, mark, key);
  if (!raw) throw NonNumericAttribute(key, "");
  const auto v = text::parse_length(*raw);
  if (!v) throw NonNumericAttribute(key, *raw);
  return *v;
}

SortAxis detect_bar_axis(const dom::Document& doc, const std::vector<const dom::ElementNode*>& marks) {
  std::optional<double> left;
  for (const auto* n : marks) {
    const auto g = dom::resolve_geometry(doc, *n);
    if (!g.x) return SortAxis::x;
    if (left && std::abs(*left - *g.x) > 1.0) return SortAxis::x;
    left = left.value_or(*g.x);
  }
  return marks.size() >= 2 ? SortAxis::y : SortAxis::x;
}

CheckResult check_sorted(const dom::Document& doc, const dom::Selector& marks, const std::string& key,
                         rubric::SortOrder order, SortAxis along) {
  const auto nodes = graded_marks(doc, marks);
  if (nodes.size() < 2) {
    throw InsufficientMarks(fmt::format("sorting needs at least 2 marks, '{}' matched {}", marks.expression(),
                                        nodes.size()));
  }
  if (along == SortAxis::automatic) along = detect_bar_axis(doc, nodes);

  struct Item {
    double position;
    double value;
    const dom::ElementNode* node;
  };
  std::vector<Item> items;
  for (const auto* n : nodes) {
    const auto g = dom::resolve_geometry(doc, *n);
    double pos = 0;
    if (along == SortAxis::x) pos = g.cx ? *g.cx : g.x ? *g.x + g.width.value_or(0) / 2 : 0;
    else pos = g.cy ? *g.cy : g.y ? *g.y + g.height.value_or(0) / 2 : 0;
    items.push_back({pos, mark_value(doc, *n, key, along == SortAxis::x), n});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.position < b.position; });

  std::vector<double> values;
  for (const auto& i : items) values.push_back(i.value);
  const bool ascending = order == rubric::SortOrder::ascending;
  std::vector<std::string> lines{fmt::format("Marks ordered {} by position; {} values: {}",
                                             along == SortAxis::x ? "left to right" : "top to bottom", key,
                                             format_list(values))};
  for (std::size_t i = 1; i < items.size(); ++i) {
    const double prev = items[i - 1].value, cur = items[i].value;
    if (ascending ? cur < prev : cur > prev) {
      lines.push_back(fmt::format("First inversion at index {} ({} {} {}): {} before {}", i,
                                  text::format_number(prev), ascending ? ">" : "<", text::format_number(cur),
                                  describe_mark(*items[i - 1].node), describe_mark(*items[i].node)));
      auto r = fail(fmt::format("{} in {} order", key, ascending ? "ascending" : "descending"), format_list(values),
                    std::move(lines));
      r.offenders = {items[i - 1].node->id, items[i].node->id};
      return r;
    }
  }
  return pass(std::move(lines));
}

CheckResult check_constant(const dom::Document& doc, const dom::Selector& marks, const std::string& key,
                           double tolerance) {
  const auto nodes = graded_marks(doc, marks);
  if (nodes.empty()) throw InsufficientMarks("'" + marks.expression() + "' matched no marks");
  const bool vertical = detect_bar_axis(doc, nodes) == SortAxis::x;
  const dom::ElementNode* lo = nullptr;
  const dom::ElementNode* hi = nullptr;
  double min = 0, max = 0;
  for (const auto* n : nodes) {
    const double v = mark_value(doc, *n, key, vertical);
    if (!lo || v < min) { min = v; lo = n; }
    if (!hi || v > max) { max = v; hi = n; }
  }
  std::vector<std::string> lines{fmt::format("{} {} across {} marks: min {}, max {} (tolerance {})", key,
                                             max - min <= tolerance ? "constant" : "varies", nodes.size(),
                                             text::format_number(min), text::format_number(max),
                                             text::format_number(tolerance))};
  if (max - min <= tolerance) return pass(std::move(lines));
  auto r = fail(fmt::format("the same {} on every mark (within {})", key, text::format_number(tolerance)),
                fmt::format("{} ranges from {} to {}", key, text::format_number(min), text::format_number(max)),
                std::move(lines));
  r.offenders = {lo->id, hi->id};
  return r;
}

dom::Rgba mark_color(const dom::Document& doc, const dom::ElementNode& mark, const std::string& property) {
  const auto v = dom::style_value(doc, mark, property);
  if (!v) return dom::parse_color(property == "fill" ? "black" : "none");
  return dom::parse_color(*v);
}

CheckResult check_color_grouping(const dom::Document& doc, const std::vector<dom::Selector>& groups,
                                 const std::string& property) {
  std::vector<std::string> lines;
  std::vector<std::pair<std::string, dom::Rgba>> group_colors;
  std::vector<dom::NodeId> offenders;
  std::vector<std::string> problems;
  for (const auto& sel : groups) {
    const auto nodes = graded_marks(doc, sel);
    if (nodes.empty()) {
      problems.push_back(fmt::format("'{}' matched no marks", sel.expression()));
      continue;
    }
    const auto first = mark_color(doc, *nodes.front(), property);
    bool uniform = true;
    for (const auto* n : nodes) {
      const auto c = mark_color(doc, *n, property);
      if (c != first) {
        if (uniform) {
          problems.push_back(fmt::format("'{}' mixes {} and {}", sel.expression(), dom::to_string(first),
                                         dom::to_string(c)));
        }
        uniform = false;
        offenders.push_back(n->id);
      }
    }
    lines.push_back(fmt::format("'{}': {} mark{}, {} {}", sel.expression(), nodes.size(), nodes.size() == 1 ? "" : "s",
                                property, uniform ? dom::to_string(first) : "mixed"));
    if (uniform) group_colors.emplace_back(sel.expression(), first);
  }
  for (std::size_t a = 0; a < group_colors.size(); ++a) {
    for (std::size_t b = a + 1; b < group_colors.size(); ++b) {
      if (group_colors[a].second == group_colors[b].second) {
        problems.push_back(fmt::format("'{}' and '{}' share the color {}", group_colors[a].first,
                                       group_colors[b].first, dom::to_string(group_colors[a].second)));
      }
    }
  }
  if (problems.empty()) return pass(std::move(lines));
  lines.insert(lines.end(), problems.begin(), problems.end());
  auto r = fail(fmt::format("one {} per group, different across groups", property), problems.front(),
                std::move(lines));
  r.offenders = std::move(offenders);
  return r;
}

}  // namespace visgrade::checks
