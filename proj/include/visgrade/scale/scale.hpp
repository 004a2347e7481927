#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "visgrade/dom/color.hpp"
#include "visgrade/dom/document.hpp"
#include "visgrade/dom/selector.hpp"
#include "visgrade/rubric/rubric.hpp"

namespace visgrade::scale {

using rubric::Orientation;
using rubric::ScaleKind;

// ---- tick labels ----

/// Number grammar for tick labels: optional sign (ASCII or U+2212), digits
/// with optional comma groups, optional fraction, optional suffix k, M, G or
/// %. "%" divides by 100.
std::optional<double> parse_number_label(std::string_view label);

/// "YYYY", "YYYY-MM", "YYYY-MM-DD" or "Mon YYYY", as UTC epoch milliseconds.
std::optional<double> parse_date_label(std::string_view label);

struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  friend bool operator==(const CivilDate&, const CivilDate&) = default;
};
double epoch_ms(const CivilDate& date);
CivilDate civil_from_epoch_ms(double ms);

struct TickSample {
  double position_px = 0;  // along the axis
  std::string label;
  std::optional<double> number;   // parse_number_label
  std::optional<double> time_ms;  // parse_date_label
};

struct AxisTicks {
  Orientation orientation = Orientation::horizontal;  // never automatic
  std::vector<TickSample> samples;                    // document order
  /// Along-axis extent of the axis domain path, when drawn.
  std::optional<std::array<double, 2>> extent_px;
};

/// Throws AxisNotFound, NoTicks. Automatic orientation is resolved from the
/// tick layout (horizontal when undecidable).
AxisTicks extract_ticks(const dom::Document& doc, const dom::Selector& axis_group, Orientation orientation);

// ---- fitting ----

struct FitOptions {
  double min_r2 = 0.999;
  double max_residual_px = 2.0;
  double band_tolerance_px = 1.0;  // spacing uniformity for band scales
};

/// A recovered mapping. Continuous kinds map value v to
///   y_mean + slope * (g(v) - x_mean)
/// with g = identity, log10, sqrt or epoch ms.
struct InferredScale {
  ScaleKind kind = ScaleKind::linear;
  Orientation orientation = Orientation::horizontal;

  std::array<double, 2> domain{0, 0};    // continuous: [min, max] value
  std::array<double, 2> range_px{0, 0};  // forward(domain[0]), forward(domain[1])
  double fit_r2 = 0;
  std::size_t tick_count = 0;
  std::size_t unparsed_count = 0;
  std::vector<TickSample> ticks;  // samples used by the fit, document order

  double slope = 0;
  double intercept = 0;  // position at g(v) = 0
  double x_mean = 0;
  double y_mean = 0;
  double residual_max_px = 0;

  // band
  std::vector<std::string> categories;
  std::vector<double> band_centers_px;
  double bandwidth_px = 0;  // median spacing between adjacent centers

  // quantile-color
  std::vector<double> thresholds;
  std::vector<dom::Rgba> colors;
};

/// g(v) for the kind; nullopt when v is outside g's domain (log of v <= 0).
std::optional<double> transform_value(ScaleKind kind, double v);
double inverse_transform(ScaleKind kind, double g);

/// Throws InsufficientTicks, PoorFit.
InferredScale fit_scale(const std::vector<TickSample>& samples, ScaleKind kind, const FitOptions& options,
                        Orientation orientation = Orientation::horizontal);

/// Widens a continuous domain so that it covers the drawn axis extent.
void extend_to_axis_extent(InferredScale& scale, std::array<double, 2> extent_px);

/// extract_ticks + fit_scale + extend_to_axis_extent.
InferredScale infer_axis_scale(const dom::Document& doc, const dom::Selector& axis_group, ScaleKind kind,
                               Orientation orientation, const FitOptions& options);

/// Best-fitting continuous kind for the samples, for diagnostics.
struct KindSuggestion {
  ScaleKind kind = ScaleKind::linear;
  double r2 = 0;
};
std::optional<KindSuggestion> suggest_kind(const std::vector<TickSample>& samples);

// ---- mapping ----

inline constexpr double kExtrapolationAllowance = 0.05;

struct Projection {
  double px = 0;
  bool extrapolated = false;  // outside the domain but within the allowance
};

/// Continuous kinds. Throws DomainViolation beyond the 5% allowance
/// (measured in transformed space).
Projection forward(const InferredScale& scale, double value);
/// Band kind: center of the category's band. Throws UnknownCategory.
double forward_band(const InferredScale& scale, std::string_view category);
/// Quantile-color kind.
dom::Rgba forward_color(const InferredScale& scale, double value);

// ---- quantile colors ----

/// Thresholds of a k-quantile scale over `values` (R-7 interpolation).
std::vector<double> quantile_thresholds(std::vector<double> values, int k);
/// Bucket index for a value: number of thresholds <= value.
std::size_t quantile_bucket(const std::vector<double>& thresholds, double value);

/// Checks that mark colors follow the k-quantile partition of `values`.
/// Throws WrongColorCount, QuantileMismatch (naming the first offending
/// datum in input order).
InferredScale infer_quantile_colors(const std::vector<double>& values, const std::vector<dom::Rgba>& colors, int k);

}  // namespace visgrade::scale
