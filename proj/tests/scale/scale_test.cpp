#include <gtest/gtest.h>

#include <random>
#include <string>

#include <fmt/format.h>

#include "../support/quantile_oracle.hpp"
#include "../support/scale_gen.hpp"
#include "visgrade/dom/document.hpp"
#include "visgrade/error.hpp"
#include "visgrade/scale/scale.hpp"

using namespace visgrade;
using namespace visgrade::scale;

namespace {

std::vector<TickSample> samples(std::initializer_list<std::pair<double, const char*>> ticks) {
  std::vector<TickSample> out;
  for (const auto& [px, label] : ticks) {
    TickSample s;
    s.position_px = px;
    s.label = label;
    s.number = parse_number_label(label);
    s.time_ms = parse_date_label(label);
    out.push_back(s);
  }
  return out;
}

InferredScale fit(std::initializer_list<std::pair<double, const char*>> ticks, ScaleKind kind) {
  return fit_scale(samples(ticks), kind, FitOptions{});
}

const dom::Rgba kA = dom::parse_color("#1f77b4");
const dom::Rgba kB = dom::parse_color("#ff7f0e");
const dom::Rgba kC = dom::parse_color("#2ca02c");

}  // namespace

TEST(ParseNumberLabel, Grammar) {
  EXPECT_EQ(parse_number_label("1,000"), 1000);
  EXPECT_EQ(parse_number_label("5k"), 5000);
  EXPECT_EQ(parse_number_label("2.5M"), 2.5e6);
  EXPECT_EQ(parse_number_label("40%"), 0.4);
  EXPECT_EQ(parse_number_label("\xE2\x88\x92" "20"), -20);
  EXPECT_EQ(parse_number_label(" -0.5 "), -0.5);
  EXPECT_EQ(parse_number_label("12,345,678.25"), 12345678.25);
  EXPECT_EQ(parse_number_label(".5"), 0.5);
  EXPECT_FALSE(parse_number_label("1,00"));
  EXPECT_FALSE(parse_number_label("1,0000"));
  EXPECT_FALSE(parse_number_label("abc"));
  EXPECT_FALSE(parse_number_label(""));
  EXPECT_FALSE(parse_number_label("%"));
  EXPECT_FALSE(parse_number_label("1.2.3"));
}

TEST(ParseDateLabel, Forms) {
  EXPECT_EQ(parse_date_label("1970"), 0);
  EXPECT_EQ(parse_date_label("1970-01-02"), 86'400'000);
  EXPECT_EQ(parse_date_label("1980"), epoch_ms({1980, 1, 1}));
  EXPECT_EQ(parse_date_label("2001-03"), epoch_ms({2001, 3, 1}));
  EXPECT_EQ(parse_date_label("Mar 2001"), epoch_ms({2001, 3, 1}));
  EXPECT_EQ(parse_date_label("September 2001"), epoch_ms({2001, 9, 1}));
  EXPECT_FALSE(parse_date_label("2001-02-30"));
  EXPECT_FALSE(parse_date_label("2001-13"));
  EXPECT_FALSE(parse_date_label("Foo 2001"));
  EXPECT_FALSE(parse_date_label("25"));
  // 2000-03-01 is day 11017 (30 years of 365 days plus 7 leap days, plus 59).
  EXPECT_EQ(epoch_ms({2000, 3, 1}), 11017.0 * 86'400'000);
  EXPECT_EQ(civil_from_epoch_ms(epoch_ms({1999, 12, 31}) + 1000), (CivilDate{1999, 12, 31}));
  EXPECT_EQ(civil_from_epoch_ms(-1), (CivilDate{1969, 12, 31}));
}

TEST(ExtractTicks, TranslatedTickGroups) {
  const auto doc = dom::parse_snapshot(
      R"~(<svg><g id="x" transform="translate(10,200)">)~"
      R"~(<g class="tick" transform="translate(0,0)"><text>0</text></g>)~"
      R"~(<g class="tick" transform="translate(50,0)"><text>25</text></g>)~"
      R"~(<g class="tick" transform="translate(100,0)"><text>50</text></g></g></svg>)~");
  const auto ticks = extract_ticks(doc, dom::Selector::parse("#x"), Orientation::horizontal);
  ASSERT_EQ(ticks.samples.size(), 3u);
  EXPECT_EQ(ticks.samples[1].number, 25);
  EXPECT_EQ(ticks.samples[2].number, 50);
  EXPECT_EQ(ticks.samples[1].position_px, 60);
}

TEST(ExtractTicks, AutomaticOrientationResolves) {
  const auto doc = dom::parse_snapshot(
      R"~(<svg><g id="y"><g class="tick" transform="translate(0,100)"><text>0</text></g>)~"
      R"~(<g class="tick" transform="translate(0,50)"><text>5</text></g>)~"
      R"~(<g class="tick" transform="translate(0,0)"><text>10</text></g></g></svg>)~");
  const auto ticks = extract_ticks(doc, dom::Selector::parse("#y"), Orientation::automatic);
  EXPECT_EQ(ticks.orientation, Orientation::vertical);
  EXPECT_EQ(ticks.samples[1].position_px, 50);
}

TEST(ExtractTicks, Errors) {
  const auto doc = dom::parse_snapshot(R"~(<svg><g id="x"><path class="domain" d="M0,0H100"/></g></svg>)~");
  EXPECT_THROW(extract_ticks(doc, dom::Selector::parse("#x"), Orientation::horizontal), NoTicks);
  EXPECT_THROW(extract_ticks(doc, dom::Selector::parse("#missing"), Orientation::horizontal), AxisNotFound);
}

TEST(FitScale, LinearExample) {
  const auto s = fit({{0, "0"}, {50, "25"}, {100, "50"}}, ScaleKind::linear);
  EXPECT_EQ(s.domain, (std::array<double, 2>{0, 50}));
  EXPECT_NEAR(s.range_px[0], 0, 1e-12);
  EXPECT_NEAR(s.range_px[1], 100, 1e-12);
  EXPECT_DOUBLE_EQ(s.fit_r2, 1.0);
  EXPECT_EQ(s.tick_count, 3u);
  EXPECT_NEAR(forward(s, 25).px, 50, 1e-12);
}

TEST(FitScale, LogExample) {
  const auto s = fit({{0, "1"}, {100, "10"}, {200, "100"}}, ScaleKind::log);
  EXPECT_EQ(s.domain, (std::array<double, 2>{1, 100}));
  EXPECT_NEAR(forward(s, 10).px, 100, 1e-9);
}

TEST(FitScale, SqrtExampleAndItsLinearR2) {
  EXPECT_NO_THROW(fit({{0, "0"}, {100, "25"}, {200, "100"}}, ScaleKind::sqrt));
  // By hand: x = (0, 25, 100), y = (0, 100, 200); sxy = 10000,
  // sxx = 16250/3, syy = 20000, so r² = sxy² / (sxx syy) = 12/13.
  try {
    fit({{0, "0"}, {100, "25"}, {200, "100"}}, ScaleKind::linear);
    FAIL() << "expected PoorFit";
  } catch (const PoorFit& e) {
    EXPECT_NEAR(e.r2(), 12.0 / 13.0, 1e-12);
    EXPECT_EQ(e.scale_kind(), "linear");
  }
}

TEST(FitScale, InvertedVertical) {
  auto s = fit_scale(samples({{200, "0"}, {100, "10"}, {0, "20"}}), ScaleKind::linear, {}, Orientation::vertical);
  EXPECT_NEAR(forward(s, 20).px, 0, 1e-12);
  EXPECT_NEAR(s.range_px[0], 200, 1e-12);
  EXPECT_LT(s.slope, 0);
}

TEST(FitScale, TimeYears) {
  const auto s = fit({{0, "1980"}, {100, "1985"}, {200, "1990"}, {300, "1995"}}, ScaleKind::time);
  // Leap days make year ticks very slightly non-uniform; still a clean fit.
  EXPECT_GT(s.fit_r2, 0.99999);
  EXPECT_NEAR(forward(s, epoch_ms({1985, 1, 1})).px, 100, 0.1);
}

TEST(FitScale, InsufficientAndUnparseable) {
  EXPECT_THROW(fit({{0, "0"}, {50, "1"}}, ScaleKind::linear), InsufficientTicks);
  EXPECT_THROW(fit({{0, "a"}, {10, "b"}, {20, "c"}, {30, "0"}, {40, "1"}, {50, "2"}, {60, "d"}}, ScaleKind::linear),
               InsufficientTicks);
  EXPECT_THROW(fit({{0, "5"}, {10, "5"}, {20, "5"}}, ScaleKind::linear), InsufficientTicks);
  // Up to half unparseable is tolerated and counted.
  const auto s = fit({{0, "0"}, {10, "1"}, {20, "2"}, {30, "x"}, {40, "y"}, {50, "z"}}, ScaleKind::linear);
  EXPECT_EQ(s.unparsed_count, 3u);
  EXPECT_EQ(s.tick_count, 3u);
}

TEST(FitScale, LogOfNonPositiveIsPoorFit) {
  EXPECT_THROW(fit({{0, "0"}, {100, "10"}, {200, "100"}}, ScaleKind::log), PoorFit);
}

TEST(FitScale, ResidualRejection) {
  // r² stays high on a long axis, but one tick sits 5px off.
  EXPECT_THROW(fit({{0, "0"}, {1000, "100"}, {2005, "200"}, {3000, "300"}, {4000, "400"}}, ScaleKind::linear),
               PoorFit);
}

TEST(FitScale, Band) {
  const auto s = fit({{25, "A"}, {75, "B"}, {125, "C"}}, ScaleKind::band);
  EXPECT_EQ(s.categories, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(s.bandwidth_px, 50);
  EXPECT_EQ(forward_band(s, "B"), 75);
  EXPECT_THROW(forward_band(s, "D"), UnknownCategory);
  EXPECT_THROW(fit({{25, "A"}, {75, "B"}, {140, "C"}}, ScaleKind::band), PoorFit);
  EXPECT_THROW(fit({{25, "A"}, {75, "A"}}, ScaleKind::band), PoorFit);
  EXPECT_THROW(fit({{25, "A"}}, ScaleKind::band), InsufficientTicks);
}

TEST(Forward, ExtrapolationAllowance) {
  const auto s = fit({{0, "0"}, {50, "25"}, {100, "50"}}, ScaleKind::linear);
  const auto p = forward(s, 52);
  EXPECT_TRUE(p.extrapolated);
  EXPECT_NEAR(p.px, 104, 1e-9);
  EXPECT_FALSE(forward(s, 50).extrapolated);
  EXPECT_THROW(forward(s, 53), DomainViolation);
  EXPECT_THROW(forward(s, -3), DomainViolation);
}

TEST(InferAxisScale, DomainExtendsToAxisPath) {
  const auto doc = dom::parse_snapshot(
      R"~(<svg><g id="x"><path class="domain" d="M0,6V0H200V6"/>)~"
      R"~(<g class="tick" transform="translate(20,0)"><text>10</text></g>)~"
      R"~(<g class="tick" transform="translate(100,0)"><text>50</text></g>)~"
      R"~(<g class="tick" transform="translate(180,0)"><text>90</text></g></g></svg>)~");
  const auto s = infer_axis_scale(doc, dom::Selector::parse("#x"), ScaleKind::linear, Orientation::horizontal, {});
  EXPECT_NEAR(s.domain[0], 0, 1e-9);
  EXPECT_NEAR(s.domain[1], 100, 1e-9);
  EXPECT_NEAR(forward(s, 100).px, 200, 1e-9);
}

TEST(SuggestKind, PicksTheGenerator) {
  const auto s = suggest_kind(samples({{0, "1"}, {100, "10"}, {200, "100"}, {300, "1000"}}));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->kind, ScaleKind::log);
  EXPECT_NEAR(s->r2, 1, 1e-12);
}

TEST(QuantileColors, ReferenceCases) {
  std::vector<double> values{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<dom::Rgba> colors{kA, kA, kA, kA, kB, kB, kB, kB};
  const auto s = infer_quantile_colors(values, colors, 2);
  EXPECT_EQ(s.thresholds, std::vector<double>{4.5});
  EXPECT_EQ(s.colors, (std::vector<dom::Rgba>{kA, kB}));
  EXPECT_EQ(forward_color(s, 4.4), kA);
  EXPECT_EQ(forward_color(s, 4.5), kB);

  colors[1] = kB;
  try {
    infer_quantile_colors(values, colors, 2);
    FAIL() << "expected QuantileMismatch";
  } catch (const QuantileMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("value 2"), std::string::npos) << e.what();
  }

  try {
    infer_quantile_colors(values, std::vector<dom::Rgba>(8, kA), 4);
    FAIL() << "expected WrongColorCount";
  } catch (const WrongColorCount& e) {
    EXPECT_EQ(e.found(), 1u);
    EXPECT_EQ(e.expected(), 4u);
  }
}

TEST(QuantileColors, ThresholdsInterpolate) {
  // n = 5, k = 4: h = 1, 2, 3 fall on data; k = 3: h = 4/3, 8/3.
  EXPECT_EQ(quantile_thresholds({10, 20, 30, 40, 50}, 4), (std::vector<double>{20, 30, 40}));
  const auto t = quantile_thresholds({50, 10, 40, 20, 30}, 3);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_NEAR(t[0], 20 + 10.0 / 3, 1e-12);
  EXPECT_NEAR(t[1], 30 + 20.0 / 3, 1e-12);
  EXPECT_EQ(quantile_bucket({20, 30, 40}, 20), 1u);
  EXPECT_EQ(quantile_bucket({20, 30, 40}, 19.9), 0u);
  EXPECT_EQ(quantile_bucket({20, 30, 40}, 99), 3u);
}

TEST(QuantileColors, SwappedBucketColorsMismatch) {
  // Each bucket is uniform but the first datum appears in the wrong one.
  std::vector<double> values{1, 2, 3, 4, 5, 6};
  std::vector<dom::Rgba> colors{kA, kA, kB, kB, kC, kC};
  EXPECT_NO_THROW(infer_quantile_colors(values, colors, 3));
  colors = {kB, kA, kA, kB, kC, kC};
  EXPECT_THROW(infer_quantile_colors(values, colors, 3), QuantileMismatch);
}

TEST(QuantileColors, AgreesWithBruteForce) {
  std::mt19937_64 rng(17);
  const std::vector<dom::Rgba> palette{kA, kB, kC, dom::parse_color("red"), dom::parse_color("navy"),
                                       dom::parse_color("gold"), dom::parse_color("teal"), dom::parse_color("gray"),
                                       dom::parse_color("pink")};
  int accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 8);
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(static_cast<double>(rng() % 50) / 10);
    std::vector<dom::Rgba> colors;
    const auto truth = synth::quantile_oracle(values, std::vector<dom::Rgba>(n, kA), k);
    for (auto b : truth.buckets) colors.push_back(palette[b]);
    if (rng() % 2) colors[rng() % n] = palette[rng() % static_cast<std::size_t>(k)];

    const auto oracle = synth::quantile_oracle(values, colors, k);
    bool ours = true;
    try {
      const auto s = infer_quantile_colors(values, colors, k);
      ASSERT_EQ(s.thresholds.size(), oracle.thresholds.size());
      for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
        EXPECT_NEAR(s.thresholds[i], static_cast<double>(oracle.thresholds[i]), 1e-9);
      }
    } catch (const WrongColorCount&) {
      ours = false;
    } catch (const QuantileMismatch&) {
      ours = false;
    }
    EXPECT_EQ(ours, oracle.accepted) << "trial " << trial;
    accepted += ours;
  }
  EXPECT_GT(accepted, 30);
  EXPECT_LT(accepted, 270);
}

// Forward reproduces the generator at every tick and between them, and the
// other continuous kinds are rejected.
TEST(ScaleProperties, RecoveryAndKindDiscrimination) {
  std::mt19937_64 rng(3);
  const std::array kinds{ScaleKind::linear, ScaleKind::log, ScaleKind::sqrt};
  for (int trial = 0; trial < 150; ++trial) {
    const auto kind = kinds[static_cast<std::size_t>(trial) % 3];
    const auto gen = synth::random_scale(rng, kind);
    const auto doc = dom::parse_snapshot(gen.render(300));
    const auto orientation = gen.vertical ? Orientation::vertical : Orientation::horizontal;
    const auto ticks = extract_ticks(doc, dom::Selector::parse("#axis"), orientation);
    const auto s = fit_scale(ticks.samples, kind, {}, orientation);
    const double offset = gen.vertical ? 20 : 40;  // outer margin group
    for (double v : gen.ticks) EXPECT_NEAR(forward(s, v).px - offset, gen.position(v), 1e-6);
    for (int i = 0; i < 100; ++i) {
      const double v = gen.value_at(std::uniform_real_distribution<double>(0, 1)(rng));
      EXPECT_NEAR(forward(s, v).px - offset, gen.position(v), 0.5);
    }
    for (auto other : kinds) {
      if (other != kind) {
        EXPECT_THROW(fit_scale(ticks.samples, other, {}, orientation), PoorFit);
      }
    }
  }
}

TEST(ScaleProperties, MonotoneForward) {
  std::mt19937_64 rng(8);
  const std::array kinds{ScaleKind::linear, ScaleKind::log, ScaleKind::sqrt};
  for (int trial = 0; trial < 60; ++trial) {
    const auto gen = synth::random_scale(rng, kinds[static_cast<std::size_t>(trial) % 3]);
    const auto ticks = extract_ticks(dom::parse_snapshot(gen.render()), dom::Selector::parse("#axis"),
                                     gen.vertical ? Orientation::vertical : Orientation::horizontal);
    const auto s = fit_scale(ticks.samples, gen.kind, {}, ticks.orientation);
    const double direction = gen.r1 > gen.r0 ? 1 : -1;
    double previous = forward(s, s.domain[0]).px;
    for (int i = 1; i <= 200; ++i) {
      const double px = forward(s, gen.value_at(i / 200.0)).px;
      EXPECT_GT(direction * (px - previous), 0);
      previous = px;
    }
  }
}

TEST(ScaleProperties, TranslationChangesInterceptOnly) {
  std::mt19937_64 rng(21);
  const std::array kinds{ScaleKind::linear, ScaleKind::log, ScaleKind::sqrt};
  for (int trial = 0; trial < 90; ++trial) {
    const auto gen = synth::random_scale(rng, kinds[static_cast<std::size_t>(trial) % 3]);
    auto base = extract_ticks(dom::parse_snapshot(gen.render()), dom::Selector::parse("#axis"),
                              gen.vertical ? Orientation::vertical : Orientation::horizontal).samples;
    // Add some noise so r² is not trivially 1.
    for (auto& t : base) t.position_px += std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
    const double shift = std::uniform_real_distribution<double>(-500, 500)(rng);
    auto moved = base;
    for (auto& t : moved) t.position_px += shift;
    for (auto kind : kinds) {
      std::optional<InferredScale> a, b;
      try { a = fit_scale(base, kind, {}); } catch (const PoorFit&) {}
      try { b = fit_scale(moved, kind, {}); } catch (const PoorFit&) {}
      ASSERT_EQ(a.has_value(), b.has_value());
      if (!a) continue;
      EXPECT_NEAR(a->fit_r2, b->fit_r2, 1e-9);
      EXPECT_NEAR(a->slope, b->slope, 1e-9 * std::abs(a->slope) + 1e-12);
      EXPECT_NEAR(b->intercept - a->intercept, shift, 1e-6 * (1 + std::abs(a->intercept)));
    }
  }
}
