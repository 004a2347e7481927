#pragma once

#include <optional>
#include <string>
#include <vector>

#include "visgrade/dom/document.hpp"
#include "visgrade/dom/transform.hpp"
#include "visgrade/rubric/rubric.hpp"

namespace visgrade::layout {

enum class Confidence { explicit_translate, inferred, unknown };

/// Where a detected quantity came from.
enum class Source {
  attribute,       // svg width/height
  view_box,        // svg viewBox
  translate,       // first <g> child's transform
  axis_domain,     // extent of an axis domain path
  axis_baseline,   // origin of a horizontal axis group
  ticks,           // extreme tick positions
  content_bounds,  // bounding box of the plotted content
  none
};

struct Margins {
  double top = 0;
  double right = 0;
  double bottom = 0;
  double left = 0;
};

struct LayoutReport {
  double svg_width = 0;
  double svg_height = 0;
  Margins margins;
  double inner_width = 0;
  double inner_height = 0;
  dom::Transform2D origin_transform;
  Confidence confidence = Confidence::unknown;

  Source size_source = Source::none;
  Source top_source = Source::none;
  Source right_source = Source::none;
  Source bottom_source = Source::none;
  Source left_source = Source::none;
  std::vector<std::string> notes;  // anomalies worth telling the student
};

/// Throws NoSvgFound, MultipleSvg.
LayoutReport detect_layout(const dom::Document& doc, const rubric::StructureSpec& spec);

/// Human-readable advisory lines; always at least one.
std::vector<std::string> format_layout_advisory(const LayoutReport& report);

inline constexpr const char* kMarginConventionUrl = "https://observablehq.com/@d3/margin-convention";

std::string to_string(Confidence c);

}  // namespace visgrade::layout
