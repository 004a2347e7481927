#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>

#include <fmt/format.h>

#include "visgrade/dom/document.hpp"
#include "visgrade/error.hpp"
#include "visgrade/layout/layout.hpp"

using namespace visgrade;
using namespace visgrade::layout;

namespace {

rubric::StructureSpec default_structure() { return {}; }

LayoutReport detect(const std::string& markup) {
  return detect_layout(dom::parse_snapshot(markup), default_structure());
}

bool has_line(const std::vector<std::string>& lines, const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(),
                     [&](const std::string& l) { return l.find(needle) != std::string::npos; });
}

struct ChartParams {
  double width, height, top, right, bottom, left;
  int ticks;
  bool translate;   // margin convention
  bool domain;      // d3 domain paths
  bool half_pixel;  // d3's 0.5 offset on ticks and domain paths
};

// A d3-style chart, every length multiplied by k.
std::string render_chart(const ChartParams& p, double k) {
  const double iw = p.width - p.left - p.right;
  const double ih = p.height - p.top - p.bottom;
  const double off = p.half_pixel ? 0.5 : 0;
  auto n = [&](double v) { return fmt::format("{}", v * k); };
  // Without the margin group, axes carry the margins in their own translate.
  const double ox = p.translate ? 0 : p.left;
  const double oy = p.translate ? 0 : p.top;

  std::string s = fmt::format(R"~(<svg width="{}" height="{}">)~", n(p.width), n(p.height));
  if (p.translate) s += fmt::format(R"~(<g transform="translate({},{})">)~", n(p.left), n(p.top));
  else s += "<g>";

  s += fmt::format(R"~(<g id="x-axis" transform="translate({},{})">)~", n(ox), n(oy + ih));
  if (p.domain) s += fmt::format(R"~(<path class="domain" d="M{},{}V{}H{}V{}"/>)~", n(off), n(6), n(off), n(iw + off), n(6));
  for (int i = 0; i < p.ticks; ++i) {
    const double x = iw * i / (p.ticks - 1) + off;
    s += fmt::format(R"~(<g class="tick" transform="translate({},0)"><line y2="{}"/><text y="{}">{}</text></g>)~",
                     n(x), n(6), n(9), i * 10);
  }
  s += "</g>";
  s += fmt::format(R"~(<g id="y-axis" transform="translate({},{})">)~", n(ox), n(oy));
  if (p.domain) s += fmt::format(R"~(<path class="domain" d="M{},{}H{}V{}H{}"/>)~", n(-6), n(ih + off), n(off), n(off), n(-6));
  for (int i = 0; i < p.ticks; ++i) {
    const double y = ih - ih * i / (p.ticks - 1) + off;
    s += fmt::format(R"~(<g class="tick" transform="translate(0,{})"><line x2="{}"/><text x="{}">{}</text></g>)~",
                     n(y), n(-6), n(-9), i * 5);
  }
  s += "</g>";
  s += fmt::format(R"~(<g id="circles"><circle cx="{}" cy="{}" r="{}"/></g>)~", n(ox + iw / 2), n(oy + ih / 2), n(3));
  s += "</g></svg>";
  return s;
}

}  // namespace

TEST(DetectLayout, ExplicitTranslate) {
  const auto r = detect(R"~(<svg width="800" height="400"><g transform="translate(40,20)"><circle r="1"/></g></svg>)~");
  EXPECT_EQ(r.confidence, Confidence::explicit_translate);
  EXPECT_EQ(r.margins.left, 40);
  EXPECT_EQ(r.margins.top, 20);
  EXPECT_EQ(r.svg_width, 800);
  EXPECT_EQ(r.svg_height, 400);
  EXPECT_EQ(r.origin_transform, dom::Transform2D::translate(40, 20));
  EXPECT_TRUE(has_line(format_layout_advisory(r), "Detected left margin: 40px (from <g> translate)"));
}

TEST(DetectLayout, InferredFromTicks) {
  std::string markup = R"~(<svg viewBox="0 0 600 300"><g id="x-axis">)~";
  for (int x = 50; x <= 550; x += 100) {
    markup += fmt::format(R"~(<g class="tick" transform="translate({},280)"><text>{}</text></g>)~", x, x);
  }
  markup += "</g></svg>";
  const auto r = detect(markup);
  EXPECT_EQ(r.confidence, Confidence::inferred);
  EXPECT_EQ(r.size_source, Source::view_box);
  EXPECT_EQ(r.margins.left, 50);
  EXPECT_EQ(r.margins.right, 50);
  EXPECT_EQ(r.inner_width, 500);
  EXPECT_EQ(r.left_source, Source::ticks);
}

TEST(DetectLayout, NoSvg) {
  EXPECT_THROW(detect("<div><p>nothing here</p></div>"), NoSvgFound);
}

TEST(DetectLayout, MultipleSvgReportsCount) {
  try {
    detect("<div><svg></svg><svg></svg><svg></svg></div>");
    FAIL() << "expected MultipleSvg";
  } catch (const MultipleSvg& e) {
    EXPECT_EQ(e.count(), 3u);
  }
}

TEST(DetectLayout, D3ConventionRecoversAllMargins) {
  const ChartParams p{800, 400, 20, 30, 30, 40, 6, true, true, true};
  const auto r = detect(render_chart(p, 1));
  EXPECT_EQ(r.confidence, Confidence::explicit_translate);
  EXPECT_DOUBLE_EQ(r.margins.left, 40);
  EXPECT_DOUBLE_EQ(r.margins.top, 20);
  EXPECT_DOUBLE_EQ(r.margins.right, 30);
  EXPECT_DOUBLE_EQ(r.margins.bottom, 30);
  EXPECT_DOUBLE_EQ(r.inner_width, 730);
  EXPECT_DOUBLE_EQ(r.inner_height, 350);
  EXPECT_TRUE(has_line(format_layout_advisory(r), "Plottable area: 730 x 350px"));
}

TEST(DetectLayout, BottomFromAxisBaselineWithoutDomainPaths) {
  const ChartParams p{600, 300, 10, 20, 40, 50, 5, true, false, false};
  const auto r = detect(render_chart(p, 1));
  EXPECT_DOUBLE_EQ(r.margins.bottom, 40);
  EXPECT_EQ(r.bottom_source, Source::axis_baseline);
  EXPECT_DOUBLE_EQ(r.margins.right, 20);
  EXPECT_EQ(r.right_source, Source::ticks);
}

TEST(DetectLayout, UnknownWithoutTranslateOrAxes) {
  const auto r = detect(R"~(<svg width="300" height="200"><circle cx="5" cy="5" r="2"/></svg>)~");
  EXPECT_EQ(r.confidence, Confidence::unknown);
  EXPECT_EQ(r.inner_width, 300);
  EXPECT_EQ(r.inner_height, 200);
  const auto lines = format_layout_advisory(r);
  EXPECT_TRUE(has_line(lines, "margin convention"));
  EXPECT_TRUE(has_line(lines, kMarginConventionUrl));
  EXPECT_TRUE(has_line(lines, "Detected left margin: 0px (unknown)"));
}

TEST(DetectLayout, NegativeMarginIsClampedAndDowngraded) {
  // x-axis domain runs past the svg's right edge.
  const auto r = detect(
      R"~(<svg width="200" height="100"><g transform="translate(20,10)">)~"
      R"~(<g class="x" transform="translate(0,80)"><path class="domain" d="M0,6V0H250V6"/></g></g></svg>)~");
  EXPECT_EQ(r.margins.right, 0);
  EXPECT_EQ(r.confidence, Confidence::inferred);
  EXPECT_TRUE(has_line(format_layout_advisory(r), "negative"));
  EXPECT_EQ(r.inner_width, 180);
}

TEST(DetectLayout, AttributeWinsOverViewBox) {
  const auto r = detect(R"~(<svg width="800" height="400" viewBox="0 0 400 200"></svg>)~");
  EXPECT_EQ(r.svg_width, 800);
  EXPECT_EQ(r.svg_height, 400);
  EXPECT_TRUE(has_line(r.notes, "disagree"));
}

TEST(DetectLayout, NestedTranslatesReportOutermost) {
  const auto r = detect(
      R"~(<svg width="500" height="300"><g transform="translate(30,10)"><g transform="translate(5,5)"><rect width="1" height="1"/></g></g></svg>)~");
  EXPECT_EQ(r.margins.left, 30);
  EXPECT_EQ(r.margins.top, 10);
  EXPECT_EQ(r.origin_transform, dom::Transform2D::translate(35, 15));
  EXPECT_TRUE(has_line(format_layout_advisory(r), "nested"));
}

TEST(DetectLayout, TranslatedAxisFirstIsNotNesting) {
  const auto r = detect(R"~(<svg width="500" height="300"><g transform="translate(60,20)">
    <g id="x" transform="translate(0,250)"><path class="domain" d="M0.5,6V0.5H420.5V6"/>
      <g class="tick" transform="translate(0.5,0)"><line y2="6"/><text y="9">0</text></g>
      <g class="tick" transform="translate(420.5,0)"><line y2="6"/><text y="9">10</text></g></g>
    <rect width="10" height="10"/></g></svg>)~");
  EXPECT_EQ(r.origin_transform, dom::Transform2D::translate(60, 20));
  EXPECT_FALSE(has_line(format_layout_advisory(r), "nested"));
}

TEST(DetectLayout, SvgSelectorFromStructure) {
  rubric::StructureSpec spec;
  spec.svg_selector = dom::Selector::parse("svg#chart");
  const auto doc = dom::parse_snapshot(
      R"~(<body><svg id="icon" width="10" height="10"></svg><svg id="chart" width="640" height="480"></svg></body>)~");
  EXPECT_EQ(detect_layout(doc, spec).svg_width, 640);
}

// Scaling every length by k scales every pixel field by k.
TEST(DetectLayout, ScalesWithChart) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> size(200, 1000), margin(0, 80), kd(0.25, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const ChartParams p{std::round(size(rng)), std::round(size(rng)), std::round(margin(rng)), std::round(margin(rng)),
                        std::round(margin(rng)), std::round(margin(rng)), 2 + static_cast<int>(rng() % 9),
                        rng() % 2 == 0, rng() % 2 == 0, rng() % 2 == 0};
    const double k = kd(rng);
    const auto base = detect(render_chart(p, 1));
    const auto scaled = detect(render_chart(p, k));
    const double tol = 1e-9 * k * 1000;
    ASSERT_EQ(base.confidence, scaled.confidence);
    EXPECT_NEAR(scaled.svg_width, k * base.svg_width, tol);
    EXPECT_NEAR(scaled.svg_height, k * base.svg_height, tol);
    EXPECT_NEAR(scaled.margins.left, k * base.margins.left, tol);
    EXPECT_NEAR(scaled.margins.top, k * base.margins.top, tol);
    EXPECT_NEAR(scaled.margins.right, k * base.margins.right, tol);
    EXPECT_NEAR(scaled.margins.bottom, k * base.margins.bottom, tol);
    EXPECT_NEAR(scaled.inner_width, k * base.inner_width, tol);
    EXPECT_NEAR(scaled.inner_height, k * base.inner_height, tol);
    EXPECT_GE(base.margins.right, 0);
    EXPECT_NEAR(base.inner_width, base.svg_width - base.margins.left - base.margins.right, 1e-9);
  }
}

TEST(FormatLayoutAdvisory, AlwaysProducesLinesWithoutMutation) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const ChartParams p{400, 300, 10, 10, 20, 30, 3 + static_cast<int>(rng() % 5), rng() % 2 == 0, rng() % 2 == 0,
                        false};
    const auto report = detect(render_chart(p, 1));
    const auto copy = report;
    const auto lines = format_layout_advisory(report);
    EXPECT_GE(lines.size(), 1u);
    EXPECT_EQ(copy.margins.left, report.margins.left);
    EXPECT_EQ(copy.notes, report.notes);
  }
  EXPECT_GE(format_layout_advisory(LayoutReport{}).size(), 1u);
}
