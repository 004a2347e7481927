#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "visgrade/dom/document.hpp"
#include "visgrade/dom/selector.hpp"
#include "visgrade/interact/actions.hpp"
#include "visgrade/rubric/dataset.hpp"

namespace visgrade::rubric {

inline constexpr int kSchemaVersion = 1;

enum class Category { advisory, appearance, positioning, interaction };
enum class ScaleKind { linear, log, sqrt, time, band, quantile_color };
/// `automatic` ("auto" in YAML) reads the direction from the tick layout,
/// so one rubric fits both vertical and horizontal charts.
enum class Orientation { horizontal, vertical, color, automatic };
enum class SortOrder { ascending, descending };
enum class SortAxis { x, y, automatic };
enum class PartialCredit { none, linear };

struct Meta {
  std::string name;
  std::string entry_file;
  double total_points = 0;
  friend bool operator==(const Meta&, const Meta&) = default;
};

struct RequiredElement {
  dom::Selector selector;
  int min_count = 1;
  friend bool operator==(const RequiredElement&, const RequiredElement&) = default;
};

struct StructureSpec {
  dom::Selector svg_selector = dom::Selector::parse("svg");
  std::vector<std::string> groups;  // ids of required <g> elements
  std::vector<RequiredElement> required;
  friend bool operator==(const StructureSpec&, const StructureSpec&) = default;
};

struct DatasetField {
  std::string dataset;
  std::string field;
  friend bool operator==(const DatasetField&, const DatasetField&) = default;
};

/// Either the values of a dataset column or a literal [low, high] pair
/// (kept as label text so dates work too).
struct ExpectedDomain {
  std::optional<DatasetField> from_dataset;
  std::vector<std::string> literal;
  friend bool operator==(const ExpectedDomain&, const ExpectedDomain&) = default;
};

/// Marks whose color encodes a data field through a quantile scale.
struct ColorEncoding {
  dom::Selector marks;
  DatasetField values;
  int k = 0;
  std::string property = "fill";
  /// When set, a mark is paired with the row whose `join_field` equals the
  /// mark's `join_attribute`; otherwise marks and rows pair by index.
  std::optional<std::string> join_attribute;
  std::optional<std::string> join_field;
  friend bool operator==(const ColorEncoding&, const ColorEncoding&) = default;
};

struct ScaleSpec {
  std::string id;
  ScaleKind kind = ScaleKind::linear;
  Orientation orientation = Orientation::automatic;
  std::optional<dom::Selector> axis_group;  // all kinds but quantile-color
  std::optional<ColorEncoding> color;       // quantile-color only
  std::optional<ExpectedDomain> expected_domain;
  friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;
};

struct Tolerances {
  double position_px = 2.0;
  double size_px = 1.0;
  double fit_r2 = 0.999;
  double residual_px = 2.0;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct LiveSettings {
  int settle_ms = 300;
  int viewport_width = 1024;
  int viewport_height = 768;
  int implicit_wait_ms = 2000;
  int page_load_timeout_ms = 15000;
  std::optional<dom::Selector> ready_selector;
  friend bool operator==(const LiveSettings&, const LiveSettings&) = default;
};

// ---- check variants ----

struct StructureCheck {
  friend bool operator==(const StructureCheck&, const StructureCheck&) = default;
};

struct LayoutCheck {
  friend bool operator==(const LayoutCheck&, const LayoutCheck&) = default;
};

/// Fits the named scale at its declared kind and checks its expected domain.
struct ScaleCheck {
  std::string scale;
  friend bool operator==(const ScaleCheck&, const ScaleCheck&) = default;
};

struct Encoding {
  std::string scale;
  std::string field;
  friend bool operator==(const Encoding&, const Encoding&) = default;
};

struct PositionsCheck {
  dom::Selector marks;
  std::string dataset;
  std::vector<Encoding> encodings;  // one or two positional scales
  double tolerance_px = 2.0;
  bool exact_count = false;
  PartialCredit partial = PartialCredit::none;
  friend bool operator==(const PositionsCheck&, const PositionsCheck&) = default;
};

/// `key` is an attribute, or one of the rect pseudo-keys "length" (extent
/// along the value axis) and "thickness" (extent across it).
struct SortedCheck {
  dom::Selector marks;
  std::string key;
  SortOrder order = SortOrder::ascending;
  SortAxis along = SortAxis::automatic;
  friend bool operator==(const SortedCheck&, const SortedCheck&) = default;
};

struct ConstantCheck {
  dom::Selector marks;
  std::string attribute;
  double tolerance = 1.0;
  friend bool operator==(const ConstantCheck&, const ConstantCheck&) = default;
};

struct ColorGroupingCheck {
  std::vector<dom::Selector> groups;
  std::string property = "fill";
  friend bool operator==(const ColorGroupingCheck&, const ColorGroupingCheck&) = default;
};

enum class TimeUnit { none, year, month, day };

struct AxisTicksCheck {
  std::string scale;
  std::optional<double> interval;
  TimeUnit unit = TimeUnit::none;
  std::vector<std::string> values;  // label text, parsed like tick labels
  friend bool operator==(const AxisTicksCheck&, const AxisTicksCheck&) = default;
};

struct InteractionCheck {
  std::vector<interact::ActionStep> actions;
  std::vector<interact::StateAssertion> assertions;
  bool fresh_page = true;
  std::optional<int> settle_ms;
  friend bool operator==(const InteractionCheck&, const InteractionCheck&) = default;
};

using Check = std::variant<StructureCheck, LayoutCheck, ScaleCheck, PositionsCheck, SortedCheck,
                           ConstantCheck, ColorGroupingCheck, AxisTicksCheck, InteractionCheck>;

struct TestSpec {
  std::string id;
  Category category = Category::advisory;
  double points = 0;
  Check check;
  std::optional<std::string> feedback_hint;
  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

struct RubricSpec {
  int schema = kSchemaVersion;
  Meta meta;
  StructureSpec structure;
  std::map<std::string, std::string> dataset_paths;  // as written, relative to base_dir
  std::map<std::string, Dataset> datasets;
  std::vector<ScaleSpec> scales;
  std::vector<TestSpec> tests;
  Tolerances tolerances;
  LiveSettings live;
  std::filesystem::path base_dir;

  const ScaleSpec* find_scale(std::string_view id) const;
  const Dataset* find_dataset(std::string_view name) const;

  friend bool operator==(const RubricSpec&, const RubricSpec&) = default;
};

/// Throws YamlSyntax, SchemaViolation, DanglingReference.
RubricSpec load_rubric(const std::filesystem::path& path);
/// Same, for rubric text; dataset paths resolve against `base_dir`.
RubricSpec parse_rubric(std::string_view yaml, const std::filesystem::path& base_dir);

/// Canonical YAML with every default spelled out; parse_rubric of the
/// result (same base_dir) yields an equal spec.
std::string to_yaml(const RubricSpec& spec);

struct StructureFinding {
  std::string selector;
  bool found = false;
  std::size_t count = 0;
  int expected_min = 1;
  friend bool operator==(const StructureFinding&, const StructureFinding&) = default;
};

/// One finding per group id ("g#<id>"), then one per required selector.
std::vector<StructureFinding> validate_structure(const StructureSpec& spec,
                                                 const dom::Document& doc);

std::string to_string(Category c);
std::string to_string(ScaleKind k);
std::string to_string(Orientation o);
std::string to_string(SortOrder o);
std::string to_string(SortAxis a);
std::string to_string(TimeUnit u);
std::optional<ScaleKind> scale_kind_from_string(std::string_view s);

/// Name of the variant ("positions", "axis_ticks", ...).
std::string check_name(const Check& check);

}  // namespace visgrade::rubric
