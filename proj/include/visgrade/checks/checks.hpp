#pragma once

#include <exception>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "visgrade/dom/document.hpp"
#include "visgrade/dom/selector.hpp"
#include "visgrade/dom/transform.hpp"
#include "visgrade/rubric/dataset.hpp"
#include "visgrade/rubric/rubric.hpp"
#include "visgrade/scale/scale.hpp"

namespace visgrade::checks {

struct CheckResult {
  bool passed = false;
  /// Share of the test's points earned, 0..1. Equals passed ? 1 : 0 unless
  /// the check grants partial credit.
  double credit = 0;
  std::string expected;
  std::string actual;
  std::vector<std::string> detail_lines;
  std::vector<dom::NodeId> offenders;
  /// Error class when the check could not be evaluated.
  std::optional<std::string> error_kind;
};

CheckResult pass(std::vector<std::string> detail_lines);
CheckResult fail(std::string expected, std::string actual, std::vector<std::string> detail_lines);

/// Rendered matches of `marks`, skipping HTML content nested in a
/// foreignObject.
std::vector<const dom::ElementNode*> graded_marks(const dom::Document& doc, const dom::Selector& marks);

/// One-line description of a fitted scale, used as the assumption line that
/// every positional result carries.
std::string describe_scale(const std::string& id, const scale::InferredScale& s);

// ---- positions ----

struct AxisBinding {
  std::string scale_id;
  const scale::InferredScale* scale = nullptr;
  std::string field;
};

struct MarkPoint {
  dom::NodeId node;
  dom::Point px;
  std::optional<std::size_t> vertex;  // index into a path's points
};

struct DatumMatch {
  std::size_t row = 0;
  std::vector<std::string> values;  // one per binding, as written in the dataset
  dom::Point expected_px;
  std::optional<std::size_t> mark;  // index into the mark points
  double distance_px = 0;           // to the matched mark, else to the nearest free one
  std::optional<std::size_t> nearest_mark;
};

struct PositionsOptions {
  double tolerance_px = 2.0;
  bool exact_count = false;
  rubric::PartialCredit partial = rubric::PartialCredit::none;
};

/// Mark anchors in root pixels. Circles and ellipses use their center; rects
/// use the band center on band axes and the end away from the zero baseline
/// on continuous axes; a lone path contributes its vertices.
std::vector<MarkPoint> mark_points(const dom::Document& doc, const dom::Selector& marks,
                                   const std::vector<AxisBinding>& bindings);

/// Expected pixel position of every dataset row. Throws DomainViolation
/// (naming the row) or UnknownCategory.
std::vector<DatumMatch> expected_positions(const rubric::Dataset& data, const std::vector<AxisBinding>& bindings);

/// Greedy one-to-one matching: all (datum, mark) pairs within tolerance,
/// closest first; ties by datum then mark coordinates, so the result does
/// not depend on document order.
void match_positions(std::vector<DatumMatch>& data, const std::vector<MarkPoint>& marks,
                     const std::vector<AxisBinding>& bindings, double tolerance_px);

CheckResult check_positions(const dom::Document& doc, const dom::Selector& marks,
                            const std::vector<AxisBinding>& bindings, const rubric::Dataset& data,
                            const PositionsOptions& options);

// ---- appearance ----

/// Numeric value of an attribute or style property, or of the rect
/// pseudo-keys "length" and "thickness". Throws NonNumericAttribute.
double mark_value(const dom::Document& doc, const dom::ElementNode& mark, const std::string& key, bool vertical_bars);

/// Horizontal bars when every rect shares its left edge (within 1px).
rubric::SortAxis detect_bar_axis(const dom::Document& doc, const std::vector<const dom::ElementNode*>& marks);

/// Throws InsufficientMarks (< 2 marks), NonNumericAttribute.
CheckResult check_sorted(const dom::Document& doc, const dom::Selector& marks, const std::string& key,
                         rubric::SortOrder order, rubric::SortAxis along);

/// Throws InsufficientMarks (no marks), NonNumericAttribute.
CheckResult check_constant(const dom::Document& doc, const dom::Selector& marks, const std::string& key,
                           double tolerance);

CheckResult check_color_grouping(const dom::Document& doc, const std::vector<dom::Selector>& groups,
                                 const std::string& property = "fill");

/// Canonical color of a mark's property; SVG defaults when unset.
dom::Rgba mark_color(const dom::Document& doc, const dom::ElementNode& mark, const std::string& property);

// ---- axes and scales ----

CheckResult check_axis_ticks(const scale::InferredScale& s, const rubric::AxisTicksCheck& spec);

/// Values of a dataset column for a scale kind (dates for time scales).
/// Throws DomainViolation naming the first unreadable cell.
std::vector<double> column_values(const rubric::Dataset& data, const std::string& field, rubric::ScaleKind kind);

/// Fits rubric scales on demand and remembers the outcome, error included.
/// Not thread-safe; use one per graded snapshot.
class ScaleResolver {
 public:
  ScaleResolver(const dom::Document& doc, const rubric::RubricSpec& rubric);

  /// Throws whatever fitting threw (PoorFit, AxisNotFound, ...).
  const scale::InferredScale& get(const std::string& id);
  scale::FitOptions fit_options() const;
  const dom::Document& document() const { return doc_; }

 private:
  scale::InferredScale fit(const rubric::ScaleSpec& spec) const;

  const dom::Document& doc_;
  const rubric::RubricSpec& rubric_;
  std::map<std::string, scale::InferredScale> fitted_;
  std::map<std::string, std::exception_ptr> failed_;
};

/// Reads mark colors and their paired data for a quantile-color encoding.
/// Throws InsufficientMarks, DomainViolation.
scale::InferredScale infer_color_encoding(const dom::Document& doc, const rubric::RubricSpec& rubric,
                                          const rubric::ColorEncoding& encoding, int k);

/// The declared scale fits at its kind and, when given, covers the expected
/// domain.
CheckResult check_scale(ScaleResolver& scales, const rubric::RubricSpec& rubric, const std::string& id);

// ---- dispatch ----

/// Evaluates a static test against a snapshot. Grading errors become failed
/// results carrying error_kind. Interaction checks are not handled here.
CheckResult run_check(const rubric::TestSpec& test, const dom::Document& doc, const rubric::RubricSpec& rubric,
                      ScaleResolver& scales);

}  // namespace visgrade::checks
