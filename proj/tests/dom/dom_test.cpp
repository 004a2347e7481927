#include <gtest/gtest.h>

#include <random>
#include <string>

#include "visgrade/dom/color.hpp"
#include "visgrade/dom/document.hpp"
#include "visgrade/dom/geometry.hpp"
#include "visgrade/dom/selector.hpp"
#include "visgrade/dom/transform.hpp"
#include "visgrade/error.hpp"

using namespace visgrade;
using namespace visgrade::dom;

namespace {

// Indented tag outline of a subtree, "tag#id" per line; mirrors the dump used
// to freeze the html5lib reference trees below.
std::string outline(const Document& doc, const ElementNode& n, int depth = 0) {
  std::string out(static_cast<std::size_t>(depth) * 2, ' ');
  out += n.tag;
  if (!n.element_id().empty()) out += "#" + std::string(n.element_id());
  out += "\n";
  for (auto child : n.children) out += outline(doc, doc.node(child), depth + 1);
  return out;
}

std::vector<std::string> ids(const std::vector<const ElementNode*>& nodes) {
  std::vector<std::string> out;
  for (const auto* n : nodes) out.emplace_back(n->element_id());
  return out;
}

}  // namespace

TEST(ParseSnapshot, NestedStructure) {
  const auto doc = parse_snapshot(R"~(<svg><g id="bars"><rect/></g></svg>)~");
  const auto& root = doc.root();
  EXPECT_EQ(root.tag, "svg");
  ASSERT_EQ(root.children.size(), 1u);
  const auto& g = doc.node(root.children[0]);
  EXPECT_EQ(g.tag, "g");
  EXPECT_EQ(g.element_id(), "bars");
  ASSERT_EQ(g.children.size(), 1u);
  EXPECT_EQ(doc.node(g.children[0]).tag, "rect");
}

TEST(ParseSnapshot, EmptyInputIsUnparseable) {
  EXPECT_THROW(parse_snapshot(""), UnparseableDocument);
  EXPECT_THROW(parse_snapshot("   \n"), UnparseableDocument);
  EXPECT_THROW(parse_snapshot("just text <!-- and a comment -->"), UnparseableDocument);
}

// Reference trees below were produced by html5lib, which implements the
// browser tree-construction algorithm.
TEST(ParseSnapshot, UnclosedRectStaysUnderGroup) {
  const auto doc = parse_snapshot(R"~(<svg><g id="bars"><rect x="1"></g><circle/></svg>)~");
  EXPECT_EQ(outline(doc, doc.root()), "svg\n  g#bars\n    rect\n  circle\n");
}

TEST(ParseSnapshot, BrowserRecoveryCases) {
  EXPECT_EQ(outline(parse_snapshot(R"~(<div><p>one<p>two<div id="d">x</div></div>)~"),
                    parse_snapshot(R"~(<div><p>one<p>two<div id="d">x</div></div>)~").root()),
            "div\n  p\n  p\n  div#d\n");
  auto doc = parse_snapshot("<svg><g></span><rect/></g></svg>");
  EXPECT_EQ(outline(doc, doc.root()), "svg\n  g\n    rect\n");
  doc = parse_snapshot("<ul><li>a<li>b</ul>");
  EXPECT_EQ(outline(doc, doc.root()), "ul\n  li\n  li\n");
  doc = parse_snapshot(R"~(<div><br><span id="s"></span></div>)~");
  EXPECT_EQ(outline(doc, doc.root()), "div\n  br\n  span#s\n");
  // "/>" is ignored on non-void HTML elements.
  doc = parse_snapshot(R"~(<div><span/><b id="b"></b></div>)~");
  EXPECT_EQ(outline(doc, doc.root()), "div\n  span\n    b#b\n");
}

TEST(ParseSnapshot, AttributesAndText) {
  const auto doc = parse_snapshot(
      "<!DOCTYPE html><html><head><title>Chart &amp; Co</title>"
      "<script>if (a < b) { x = '</div>'; }</script></head>"
      "<BODY><svg viewBox='0 0 10 10' width=100><text x=\"5\">1,000&#8722;&nbsp;</text></svg>"
      "</BODY></html>");
  EXPECT_EQ(doc.root().tag, "html");
  const auto svgs = select(doc, Selector::parse("svg"));
  ASSERT_EQ(svgs.size(), 1u);
  ASSERT_NE(svgs[0]->attribute("viewBox"), nullptr);
  EXPECT_EQ(svgs[0]->attributes[0].name, "viewBox");
  EXPECT_EQ(*svgs[0]->attribute("width"), "100");
  const auto texts = select(doc, Selector::parse("text"));
  ASSERT_EQ(texts.size(), 1u);
  EXPECT_EQ(texts[0]->text, "1,000− ");
  const auto titles = select(doc, Selector::parse("title"));
  ASSERT_EQ(titles.size(), 1u);
  EXPECT_EQ(titles[0]->text, "Chart & Co");
}

TEST(ParseSnapshot, ComputedStyleAttributeIsLifted) {
  const auto doc = parse_snapshot(
      R"~(<svg><circle fill="blue" data-visgrade-style="fill:rgb(255, 165, 0);opacity:1"/></svg>)~");
  const auto& c = doc.node(doc.root().children[0]);
  EXPECT_EQ(c.attribute("data-visgrade-style"), nullptr);
  EXPECT_EQ(c.computed_style.at("fill"), "rgb(255, 165, 0)");
  EXPECT_EQ(*style_value(doc, c, "fill"), "rgb(255, 165, 0)");
}

TEST(Style, InlineBeatsAttributeAndFillInherits) {
  const auto doc = parse_snapshot(
      R"~(<svg><g fill="steelblue"><rect id="a"/><rect id="b" fill="red" style="fill: green"/></g></svg>)~");
  const auto a = select(doc, Selector::parse("rect#a"));
  const auto b = select(doc, Selector::parse("rect#b"));
  EXPECT_EQ(*style_value(doc, *a[0], "fill"), "steelblue");
  EXPECT_EQ(*style_value(doc, *b[0], "fill"), "green");
  EXPECT_FALSE(style_value(doc, *a[0], "opacity").has_value());
}

TEST(Style, Rendered) {
  const auto doc = parse_snapshot(
      R"~(<div><div id="t1" style="opacity: 0"></div><div id="t2" style="display:none"><p id="c"></p></div><div id="t3" style="opacity:0.9"></div></div>)~");
  EXPECT_FALSE(is_rendered(doc, *select(doc, Selector::parse("#t1"))[0]));
  EXPECT_FALSE(is_rendered(doc, *select(doc, Selector::parse("#c"))[0]));
  EXPECT_TRUE(is_rendered(doc, *select(doc, Selector::parse("#t3"))[0]));
}

TEST(Select, DocumentOrderAndMissing) {
  std::string markup = R"~(<svg><g id="bars">)~";
  for (int i = 0; i < 5; ++i) markup += "<rect id=\"r" + std::to_string(i) + "\"/>";
  markup += "</g></svg>";
  const auto doc = parse_snapshot(markup);
  EXPECT_EQ(ids(select(doc, Selector::parse("g#bars rect"))),
            (std::vector<std::string>{"r0", "r1", "r2", "r3", "r4"}));
  EXPECT_TRUE(select(doc, Selector::parse("g#missing")).empty());
}

TEST(Select, NthIsZeroBased) {
  std::string markup = R"~(<svg><g id="circles">)~";
  for (int i = 0; i < 6; ++i) markup += "<circle id=\"c" + std::to_string(i) + "\"/>";
  markup += "</g></svg>";
  const auto doc = parse_snapshot(markup);
  EXPECT_EQ(ids(select(doc, Selector::parse("g#circles circle:nth(3)"))),
            std::vector<std::string>{"c3"});
  EXPECT_TRUE(select(doc, Selector::parse("g#circles circle:nth(6)")).empty());
}

TEST(Select, ClassesChildCombinatorAndScopeRoot) {
  const auto doc = parse_snapshot(
      R"~(<svg id="chart"><g id="x-axis"><g class="tick major"><text>0</text></g><g class="tick"><g class="tick" id="nested"></g></g></g></svg>)~");
  EXPECT_EQ(select(doc, Selector::parse("g#x-axis g.tick")).size(), 3u);
  EXPECT_EQ(select(doc, Selector::parse("g#x-axis > g.tick")).size(), 2u);
  EXPECT_EQ(select(doc, Selector::parse(".tick.major text")).size(), 1u);
  EXPECT_EQ(select(doc, Selector::parse("svg#chart")).size(), 1u);
  EXPECT_EQ(select(doc, Selector::parse("*")).size(), doc.nodes().size());
}

TEST(Select, InvalidExpressions) {
  for (const char* bad : {"", "g#", "g:nth(-1)", "g:nth(x)", "g:hover", "g >", "g[foo]",
                          "g:nth(1):nth(2)", "g:nth(1"}) {
    EXPECT_THROW(Selector::parse(bad), InvalidSelector) << bad;
  }
}

TEST(Select, RoundTripGeneratedSnapshotsAndPurity) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> count(0, 30);
    const int marks = count(rng);
    const int decoys = count(rng);
    std::string markup = "<svg><g id=\"decoy\">";
    for (int i = 0; i < decoys; ++i) markup += "<circle class=\"m\"/>";
    markup += "</g><g id=\"marks\">";
    std::vector<std::string> expected;
    for (int i = 0; i < marks; ++i) {
      expected.push_back("m" + std::to_string(i));
      // Interleave wrappers so matches sit at different depths.
      if (i % 3 == 0) {
        markup += "<g><circle class=\"m\" id=\"" + expected.back() + "\"/></g>";
      } else {
        markup += "<circle class=\"m\" id=\"" + expected.back() + "\"/>";
      }
    }
    markup += "</g></svg>";
    const auto doc = parse_snapshot(markup);
    const auto sel = Selector::parse("g#marks circle.m");
    const auto first = select(doc, sel);
    EXPECT_EQ(ids(first), expected);
    const auto second = select(doc, sel);
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i]->id, second[i]->id);
  }
}

TEST(ParseTransform, Examples) {
  EXPECT_EQ(parse_transform("translate(40,20)"), (Transform2D{1, 0, 0, 1, 40, 20}));
  EXPECT_TRUE(parse_transform("").is_identity());
  const Point p = parse_transform("translate(10 0) scale(2)").apply({5, 5});
  EXPECT_DOUBLE_EQ(p.x, 20);
  EXPECT_DOUBLE_EQ(p.y, 10);
  EXPECT_EQ(parse_transform("translate(-5-3)"), Transform2D::translate(-5, -3));
  EXPECT_EQ(parse_transform("matrix(1 0 0 1 3 4)"), Transform2D::translate(3, 4));
  const Point r = parse_transform("rotate(90)").apply({1, 0});
  EXPECT_NEAR(r.x, 0, 1e-12);
  EXPECT_NEAR(r.y, 1, 1e-12);
  const Point rc = parse_transform("rotate(180, 10, 10)").apply({20, 10});
  EXPECT_NEAR(rc.x, 0, 1e-12);
  EXPECT_NEAR(rc.y, 10, 1e-12);
}

TEST(ParseTransform, MalformedNamesToken) {
  try {
    parse_transform("translate(10,0) wobble(3)");
    FAIL() << "expected MalformedTransform";
  } catch (const MalformedTransform& e) {
    EXPECT_EQ(e.token(), "wobble(3)");
  }
  EXPECT_THROW(parse_transform("translate(1,2,3)"), MalformedTransform);
  EXPECT_THROW(parse_transform("translate(1"), MalformedTransform);
  EXPECT_THROW(parse_transform("scale(a)"), MalformedTransform);
}

TEST(ParseTransform, CompositionIsAssociative) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-50, 50);
  auto random_transform = [&]() {
    return Transform2D{u(rng) / 25, u(rng) / 25, u(rng) / 25, u(rng) / 25, u(rng), u(rng)};
  };
  for (int i = 0; i < 500; ++i) {
    const auto t1 = random_transform();
    const auto t2 = random_transform();
    const auto t3 = random_transform();
    const Point p{u(rng), u(rng)};
    const Point a = ((t1 * t2) * t3).apply(p);
    const Point b = (t1 * (t2 * t3)).apply(p);
    const Point c = t1.apply(t2.apply(t3.apply(p)));
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
    EXPECT_NEAR(a.x, c.x, 1e-9);
    EXPECT_NEAR(a.y, c.y, 1e-9);
  }
}

TEST(ParseColor, Formats) {
  EXPECT_EQ(parse_color("#ff0000"), (Rgba{255, 0, 0, 1.0}));
  EXPECT_EQ(parse_color("rgb(255, 0, 0)"), (Rgba{255, 0, 0, 1.0}));
  // CSS named-color table value.
  EXPECT_EQ(parse_color("steelblue"), (Rgba{70, 130, 180, 1.0}));
  EXPECT_EQ(parse_color("#f00"), parse_color("red"));
  EXPECT_EQ(parse_color("none").alpha, 0.0);
  EXPECT_EQ(parse_color("transparent").alpha, 0.0);
  EXPECT_EQ(parse_color("#ff000080"), parse_color("rgba(255, 0, 0, 0.5)"));
  EXPECT_EQ(parse_color("rgb(100% 0% 0% / 50%)"), parse_color("rgba(255,0,0,.5)"));
  EXPECT_EQ(parse_color("hsl(0, 100%, 50%)"), parse_color("red"));
  EXPECT_EQ(parse_color("  SteelBlue "), parse_color("steelblue"));
  for (const char* bad : {"", "#12", "#ggg", "rgb(1,2)", "blurple", "rgb(1,2,3"}) {
    EXPECT_THROW(parse_color(bad), UnknownColor) << bad;
  }
}

TEST(ParseColor, CanonicalAcrossFormatsAndIdempotent) {
  const auto a = parse_color("#4682b4");
  EXPECT_EQ(a, parse_color("rgb(70,130,180)"));
  EXPECT_EQ(a, parse_color("steelblue"));
  EXPECT_EQ(parse_color(to_string(a)), a);
  const auto translucent = parse_color("rgba(10, 20, 30, 0.25)");
  EXPECT_EQ(parse_color(to_string(translucent)), translucent);
}

TEST(ResolveGeometry, TranslatedCircle) {
  const auto doc =
      parse_snapshot(R"~(<svg><g transform="translate(40,20)"><circle cx="10" cy="10" r="3"/></g></svg>)~");
  const auto g = resolve_geometry(doc, *select(doc, Selector::parse("circle"))[0]);
  EXPECT_DOUBLE_EQ(*g.cx, 50);
  EXPECT_DOUBLE_EQ(*g.cy, 30);
  EXPECT_DOUBLE_EQ(*g.r, 3);
}

TEST(ResolveGeometry, IdentityRect) {
  const auto doc = parse_snapshot(R"~(<svg><rect x="0" y="0" width="20" height="7"/></svg>)~");
  const auto g = resolve_geometry(doc, *select(doc, Selector::parse("rect"))[0]);
  EXPECT_EQ(*g.x, 0);
  EXPECT_EQ(*g.y, 0);
  EXPECT_EQ(*g.width, 20);
  EXPECT_EQ(*g.height, 7);
}

TEST(ResolveGeometry, NestedTranslatesSum) {
  const auto doc = parse_snapshot(
      R"~(<svg><g transform="translate(10,0)"><g transform="translate(0,5)"><circle cx="1" cy="2"/></g></g></svg>)~");
  const auto g = resolve_geometry(doc, *select(doc, Selector::parse("circle"))[0]);
  // (1,2) + (10,0) + (0,5)
  EXPECT_DOUBLE_EQ(*g.cx, 11);
  EXPECT_DOUBLE_EQ(*g.cy, 7);
}

TEST(ResolveGeometry, ScaledRectUsesCornerBoundingBox) {
  const auto doc = parse_snapshot(
      R"~(<svg><g transform="translate(100,100) scale(2,-1)"><rect x="1" y="2" width="3" height="4"/></g></svg>)~");
  const auto g = resolve_geometry(doc, *select(doc, Selector::parse("rect"))[0]);
  EXPECT_DOUBLE_EQ(*g.x, 102);
  EXPECT_DOUBLE_EQ(*g.width, 6);
  EXPECT_DOUBLE_EQ(*g.y, 94);
  EXPECT_DOUBLE_EQ(*g.height, 4);
}

TEST(ResolveGeometry, NonNumericAttributeNamed) {
  const auto doc = parse_snapshot(R"~(<svg><circle cx="abc" cy="2"/><rect width="50%"/></svg>)~");
  try {
    resolve_geometry(doc, *select(doc, Selector::parse("circle"))[0]);
    FAIL();
  } catch (const NonNumericAttribute& e) {
    EXPECT_EQ(e.attribute(), "cx");
  }
  EXPECT_THROW(resolve_geometry(doc, *select(doc, Selector::parse("rect"))[0]), NonNumericAttribute);
}

TEST(ResolveGeometry, PathPoints) {
  const auto doc = parse_snapshot(
      R"~(<svg><g transform="translate(10,10)"><path d="M0,0L10,5h5v-5l-1,1Z"/></g></svg>)~");
  const auto g = resolve_geometry(doc, *select(doc, Selector::parse("path"))[0]);
  ASSERT_TRUE(g.path_points);
  const std::vector<Point> expected{{10, 10}, {20, 15}, {25, 15}, {25, 10}, {24, 11}};
  EXPECT_EQ(*g.path_points, expected);
}

TEST(SamplePath, CurvesAreFlattenedAtTenthSteps) {
  // Quadratic from (0,0) via (10,10) to (20,0): B(0.5) = (10, 5).
  const auto pts = sample_path("M0 0Q10 10 20 0");
  ASSERT_EQ(pts.size(), 11u);
  EXPECT_NEAR(pts[5].x, 10, 1e-12);
  EXPECT_NEAR(pts[5].y, 5, 1e-12);
  EXPECT_EQ(pts.back(), (Point{20, 0}));
  // Half circle of radius 5 from (0,0) to (10,0); midpoint sits on the circle.
  const auto arc = sample_path("M0,0A5,5 0 0,1 10,0");
  ASSERT_EQ(arc.size(), 11u);
  EXPECT_NEAR(std::hypot(arc[5].x - 5, arc[5].y), 5, 1e-9);
  EXPECT_EQ(arc.back(), (Point{10, 0}));
  // Compact d3 symbol output with flags packed together.
  EXPECT_NO_THROW(sample_path("M4.5,0A4.5,4.5,0,1,1,-4.5,0A4.5,4.5,0,1,1,4.5,0"));
  EXPECT_NO_THROW(sample_path("M0 0a1 1 0 00 10 10"));
  EXPECT_THROW(sample_path("M0,0 L"), NonNumericAttribute);
  EXPECT_THROW(sample_path("10,10"), NonNumericAttribute);
}
