#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "visgrade/error.hpp"
#include "visgrade/rubric/rubric.hpp"
#include "visgrade/text.hpp"

namespace visgrade::rubric {

namespace {

using interact::ActionKind;
using interact::ActionStep;
using interact::Relation;
using interact::StateAssertion;

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

[[noreturn]] void fail(const std::string& path, const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  if (mark.line >= 0) {
    throw SchemaViolation(path, msg + " (line " + std::to_string(mark.line + 1) + ")");
  }
  throw SchemaViolation(path, msg);
}

/// A mapping node plus its document path. Rejects unknown and duplicate
/// keys on construction.
class MapView {
 public:
  MapView(const YAML::Node& node, std::string path, std::initializer_list<std::string_view> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node.IsMap()) fail(path_.empty() ? "(root)" : path_, node, "expected a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
      if (!kv.first.IsScalar()) fail(path_, kv.first, "mapping keys must be scalars");
      const auto key = kv.first.Scalar();
      if (!seen.insert(key).second) fail(child(path_, key), kv.first, "duplicate key");
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) fail(child(path_, key), kv.first, "unknown key");
    }
  }

  bool has(std::string_view key) const {
    const auto n = node_[std::string(key)];
    return n.IsDefined() && !n.IsNull();
  }
  YAML::Node get(std::string_view key) const { return node_[std::string(key)]; }
  YAML::Node require(std::string_view key) const {
    const auto n = node_[std::string(key)];
    if (!n.IsDefined() || n.IsNull()) fail(child(path_, key), node_, "required key is missing");
    return n;
  }
  std::string path(std::string_view key) const { return child(path_, key); }
  const std::string& path() const { return path_; }
  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
};

std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(path, n, "expected a scalar");
  return n.Scalar();
}

std::string nonempty(const YAML::Node& n, const std::string& path) {
  auto s = scalar(n, path);
  if (text::trim(s).empty()) fail(path, n, "must not be empty");
  return s;
}

double number(const YAML::Node& n, const std::string& path) {
  const auto v = text::parse_double(text::trim(scalar(n, path)));
  if (!v) fail(path, n, "expected a number, got '" + n.Scalar() + "'");
  return *v;
}

double non_negative(const YAML::Node& n, const std::string& path) {
  const double v = number(n, path);
  if (v < 0) fail(path, n, "must be >= 0");
  return v;
}

double positive(const YAML::Node& n, const std::string& path) {
  const double v = number(n, path);
  if (v <= 0) fail(path, n, "must be > 0");
  return v;
}

int integer(const YAML::Node& n, const std::string& path, int min, int max) {
  const double v = number(n, path);
  if (v != std::floor(v)) fail(path, n, "expected an integer");
  if (v < min || v > max) {
    fail(path, n, "must be in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
  }
  return static_cast<int>(v);
}

bool boolean(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  if (text::iequals(s, "true")) return true;
  if (text::iequals(s, "false")) return false;
  fail(path, n, "expected true or false");
}

dom::Selector selector(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  try {
    return dom::Selector::parse(s);
  } catch (const InvalidSelector& e) {
    fail(path, n, e.what());
  }
}

template <typename Enum, std::size_t N>
Enum one_of(const YAML::Node& n, const std::string& path,
            const std::array<std::pair<std::string_view, Enum>, N>& names) {
  const auto s = scalar(n, path);
  for (const auto& [name, value] : names) {
    if (name == s) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  fail(path, n, "'" + s + "' is not one of " + allowed);
}

constexpr std::array<std::pair<std::string_view, Category>, 4> kCategories{{
    {"advisory", Category::advisory},
    {"appearance", Category::appearance},
    {"positioning", Category::positioning},
    {"interaction", Category::interaction},
}};
constexpr std::array<std::pair<std::string_view, ScaleKind>, 6> kKinds{{
    {"linear", ScaleKind::linear},
    {"log", ScaleKind::log},
    {"sqrt", ScaleKind::sqrt},
    {"time", ScaleKind::time},
    {"band", ScaleKind::band},
    {"quantile-color", ScaleKind::quantile_color},
}};
constexpr std::array<std::pair<std::string_view, Orientation>, 4> kOrientations{{
    {"horizontal", Orientation::horizontal},
    {"vertical", Orientation::vertical},
    {"color", Orientation::color},
    {"auto", Orientation::automatic},
}};
constexpr std::array<std::pair<std::string_view, SortOrder>, 2> kOrders{{
    {"ascending", SortOrder::ascending},
    {"descending", SortOrder::descending},
}};
constexpr std::array<std::pair<std::string_view, SortAxis>, 3> kAxes{{
    {"x", SortAxis::x},
    {"y", SortAxis::y},
    {"auto", SortAxis::automatic},
}};
constexpr std::array<std::pair<std::string_view, PartialCredit>, 2> kPartial{{
    {"none", PartialCredit::none},
    {"linear", PartialCredit::linear},
}};
constexpr std::array<std::pair<std::string_view, TimeUnit>, 3> kUnits{{
    {"year", TimeUnit::year},
    {"month", TimeUnit::month},
    {"day", TimeUnit::day},
}};

// ---- sections ----

Meta parse_meta(const YAML::Node& n) {
  MapView m(n, "meta", {"name", "entry_file", "total_points"});
  Meta meta;
  meta.name = nonempty(m.require("name"), m.path("name"));
  meta.entry_file = nonempty(m.require("entry_file"), m.path("entry_file"));
  meta.total_points = non_negative(m.require("total_points"), m.path("total_points"));
  return meta;
}

StructureSpec parse_structure(const YAML::Node& n) {
  MapView m(n, "structure", {"svg_selector", "groups", "required"});
  StructureSpec s;
  if (m.has("svg_selector")) s.svg_selector = selector(m.get("svg_selector"), m.path("svg_selector"));
  if (m.has("groups")) {
    const auto groups = m.get("groups");
    if (!groups.IsSequence()) fail(m.path("groups"), groups, "expected a list of group ids");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto path = index(m.path("groups"), i);
      auto id = nonempty(groups[i], path);
      if (!seen.insert(id).second) fail(path, groups[i], "duplicate group id '" + id + "'");
      try {
        dom::Selector::parse("g#" + id);
      } catch (const InvalidSelector&) {
        fail(path, groups[i], "'" + id + "' is not a usable id");
      }
      s.groups.push_back(std::move(id));
    }
  }
  if (m.has("required")) {
    const auto req = m.get("required");
    if (!req.IsSequence()) fail(m.path("required"), req, "expected a list");
    for (std::size_t i = 0; i < req.size(); ++i) {
      MapView r(req[i], index(m.path("required"), i), {"selector", "min_count"});
      RequiredElement e{selector(r.require("selector"), r.path("selector")), 1};
      if (r.has("min_count")) {
        e.min_count = integer(r.get("min_count"), r.path("min_count"), 1, 1'000'000);
      }
      s.required.push_back(std::move(e));
    }
  }
  return s;
}

Tolerances parse_tolerances(const YAML::Node& n) {
  MapView m(n, "tolerances", {"position_px", "size_px", "fit_r2", "residual_px"});
  Tolerances t;
  if (m.has("position_px")) t.position_px = positive(m.get("position_px"), m.path("position_px"));
  if (m.has("size_px")) t.size_px = positive(m.get("size_px"), m.path("size_px"));
  if (m.has("residual_px")) t.residual_px = positive(m.get("residual_px"), m.path("residual_px"));
  if (m.has("fit_r2")) {
    t.fit_r2 = number(m.get("fit_r2"), m.path("fit_r2"));
    if (!(t.fit_r2 > 0 && t.fit_r2 <= 1)) fail(m.path("fit_r2"), m.get("fit_r2"), "must be in (0, 1]");
  }
  return t;
}

LiveSettings parse_live(const YAML::Node& n) {
  MapView m(n, "live", {"settle_ms", "viewport", "implicit_wait_ms", "page_load_timeout_ms",
                        "ready_selector"});
  LiveSettings l;
  if (m.has("settle_ms")) l.settle_ms = integer(m.get("settle_ms"), m.path("settle_ms"), 0, 60'000);
  if (m.has("viewport")) {
    MapView v(m.get("viewport"), m.path("viewport"), {"width", "height"});
    l.viewport_width = integer(v.require("width"), v.path("width"), 1, 16'384);
    l.viewport_height = integer(v.require("height"), v.path("height"), 1, 16'384);
  }
  if (m.has("implicit_wait_ms")) {
    l.implicit_wait_ms = integer(m.get("implicit_wait_ms"), m.path("implicit_wait_ms"), 0, 600'000);
  }
  if (m.has("page_load_timeout_ms")) {
    l.page_load_timeout_ms =
        integer(m.get("page_load_timeout_ms"), m.path("page_load_timeout_ms"), 1, 600'000);
  }
  if (m.has("ready_selector")) {
    l.ready_selector = selector(m.get("ready_selector"), m.path("ready_selector"));
  }
  return l;
}

DatasetField dataset_field(const MapView& m, std::string_view dataset_key,
                           std::string_view field_key) {
  return {nonempty(m.require(dataset_key), m.path(dataset_key)),
          nonempty(m.require(field_key), m.path(field_key))};
}

ScaleSpec parse_scale(const YAML::Node& n, const std::string& path) {
  MapView m(n, path, {"id", "axis_group", "kind", "orientation", "expected_domain", "marks",
                      "dataset", "field", "k", "property", "join"});
  ScaleSpec s;
  s.id = nonempty(m.require("id"), m.path("id"));
  s.kind = one_of(m.require("kind"), m.path("kind"), kKinds);
  const bool color = s.kind == ScaleKind::quantile_color;
  s.orientation = color ? Orientation::color : Orientation::automatic;
  if (m.has("orientation")) s.orientation = one_of(m.get("orientation"), m.path("orientation"), kOrientations);
  if ((s.orientation == Orientation::color) != color) {
    fail(m.path("orientation"), n, "orientation 'color' goes with kind 'quantile-color' only");
  }

  const char* color_keys[] = {"marks", "dataset", "field", "k", "property", "join"};
  if (color) {
    if (m.has("axis_group")) fail(m.path("axis_group"), n, "not used by quantile-color scales");
    ColorEncoding c;
    c.marks = selector(m.require("marks"), m.path("marks"));
    c.values = dataset_field(m, "dataset", "field");
    c.k = integer(m.require("k"), m.path("k"), 2, 64);
    if (m.has("property")) c.property = nonempty(m.get("property"), m.path("property"));
    if (m.has("join")) {
      MapView j(m.get("join"), m.path("join"), {"attribute", "field"});
      c.join_attribute = nonempty(j.require("attribute"), j.path("attribute"));
      c.join_field = nonempty(j.require("field"), j.path("field"));
    }
    s.color = std::move(c);
  } else {
    for (const char* key : color_keys) {
      if (m.has(key)) fail(m.path(key), n, "only used by quantile-color scales");
    }
    s.axis_group = selector(m.require("axis_group"), m.path("axis_group"));
  }

  if (m.has("expected_domain")) {
    const auto d = m.get("expected_domain");
    const auto dpath = m.path("expected_domain");
    ExpectedDomain domain;
    if (d.IsSequence()) {
      if (d.size() != 2) fail(dpath, d, "literal domain needs exactly two values");
      for (std::size_t i = 0; i < 2; ++i) domain.literal.push_back(nonempty(d[i], index(dpath, i)));
    } else {
      MapView dm(d, dpath, {"from_dataset", "field"});
      domain.from_dataset = dataset_field(dm, "from_dataset", "field");
    }
    s.expected_domain = std::move(domain);
  }
  return s;
}

// ---- checks ----

std::optional<dom::Selector> optional_target(const YAML::Node& n, const std::string& path) {
  if (!n.IsDefined() || n.IsNull()) return std::nullopt;
  return selector(n, path);
}

ActionStep parse_action(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap() || n.size() != 1) fail(path, n, "each action is a mapping with exactly one key");
  const auto key_node = n.begin()->first;
  const auto value = n.begin()->second;
  const auto name = scalar(key_node, path);
  const auto kind = interact::action_kind_from_string(name);
  if (!kind) fail(child(path, name), key_node, "unknown action '" + name + "'");
  const auto vpath = child(path, name);

  ActionStep step;
  step.kind = *kind;
  switch (*kind) {
    case ActionKind::move_to:
    case ActionKind::click:
    case ActionKind::double_click:
    case ActionKind::scroll_to:
      if (value.IsMap()) {
        MapView m(value, vpath, {"target", "dx", "dy"});
        step.target = optional_target(m.get("target"), m.path("target"));
        if (m.has("dx")) step.dx = number(m.get("dx"), m.path("dx"));
        if (m.has("dy")) step.dy = number(m.get("dy"), m.path("dy"));
      } else {
        step.target = optional_target(value, vpath);
      }
      if (*kind == ActionKind::scroll_to && !step.target) fail(vpath, n, "scroll_to needs a target");
      break;
    case ActionKind::drag_by: {
      MapView m(value, vpath, {"target", "dx", "dy"});
      step.target = optional_target(m.get("target"), m.path("target"));
      step.dx = number(m.require("dx"), m.path("dx"));
      step.dy = number(m.require("dy"), m.path("dy"));
      if (!std::isfinite(step.dx) || !std::isfinite(step.dy)) fail(vpath, n, "offsets must be finite");
      break;
    }
    case ActionKind::drag_to: {
      MapView m(value, vpath, {"target", "destination"});
      step.target = optional_target(m.get("target"), m.path("target"));
      step.destination = selector(m.require("destination"), m.path("destination"));
      break;
    }
    case ActionKind::select_option: {
      MapView m(value, vpath, {"target", "value"});
      step.target = selector(m.require("target"), m.path("target"));
      step.option_value = scalar(m.require("value"), m.path("value"));
      break;
    }
    case ActionKind::pause:
      step.duration_ms = integer(value, vpath, 0, interact::kMaxPauseMs);
      break;
  }
  return step;
}

StateAssertion parse_assertion(const YAML::Node& n, const std::string& path) {
  MapView m(n, path, {"target", "attribute", "relation", "value", "tolerance"});
  StateAssertion a;
  a.target = selector(m.require("target"), m.path("target"));
  const auto rel_node = m.require("relation");
  const auto rel = interact::relation_from_string(scalar(rel_node, m.path("relation")));
  if (!rel) fail(m.path("relation"), rel_node, "unknown relation '" + rel_node.Scalar() + "'");
  a.relation = *rel;
  const bool needs_attribute = a.relation != Relation::element_appears &&
                               a.relation != Relation::element_disappears &&
                               a.relation != Relation::position_changed;
  if (needs_attribute) {
    a.attribute = nonempty(m.require("attribute"), m.path("attribute"));
  } else if (m.has("attribute")) {
    a.attribute = nonempty(m.get("attribute"), m.path("attribute"));
  }
  if (a.relation == Relation::equal) {
    a.literal = scalar(m.require("value"), m.path("value"));
  } else if (m.has("value")) {
    fail(m.path("value"), n, "a literal value is only used with relation 'equal'");
  }
  if (m.has("tolerance")) a.tolerance = positive(m.get("tolerance"), m.path("tolerance"));
  return a;
}

InteractionCheck parse_interaction(const MapView& m) {
  InteractionCheck c;
  const auto actions = m.require("actions");
  if (!actions.IsSequence() || actions.size() == 0) {
    fail(m.path("actions"), actions, "needs at least one action");
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    c.actions.push_back(parse_action(actions[i], index(m.path("actions"), i)));
  }
  const auto asserts = m.require("assert");
  if (!asserts.IsSequence() || asserts.size() == 0) {
    fail(m.path("assert"), asserts, "needs at least one assertion");
  }
  for (std::size_t i = 0; i < asserts.size(); ++i) {
    c.assertions.push_back(parse_assertion(asserts[i], index(m.path("assert"), i)));
  }
  if (m.has("fresh_page")) c.fresh_page = boolean(m.get("fresh_page"), m.path("fresh_page"));
  if (m.has("settle_ms")) c.settle_ms = integer(m.get("settle_ms"), m.path("settle_ms"), 0, 60'000);
  return c;
}

PositionsCheck parse_positions(const YAML::Node& n, const std::string& path, const Tolerances& tol) {
  MapView m(n, path, {"marks", "dataset", "encodings", "x_scale", "y_scale", "x_field", "y_field",
                      "tolerance_px", "exact_count", "partial"});
  PositionsCheck p;
  p.marks = selector(m.require("marks"), m.path("marks"));
  p.dataset = nonempty(m.require("dataset"), m.path("dataset"));
  const bool sugar = m.has("x_scale") || m.has("y_scale") || m.has("x_field") || m.has("y_field");
  if (m.has("encodings")) {
    if (sugar) fail(m.path("encodings"), n, "use either encodings or x_scale/y_scale, not both");
    const auto enc = m.get("encodings");
    if (!enc.IsSequence() || enc.size() == 0 || enc.size() > 2) {
      fail(m.path("encodings"), enc, "expected one or two encodings");
    }
    for (std::size_t i = 0; i < enc.size(); ++i) {
      MapView e(enc[i], index(m.path("encodings"), i), {"scale", "field"});
      p.encodings.push_back({nonempty(e.require("scale"), e.path("scale")),
                             nonempty(e.require("field"), e.path("field"))});
    }
  } else {
    for (const char* axis : {"x", "y"}) {
      const std::string scale_key = std::string(axis) + "_scale";
      const std::string field_key = std::string(axis) + "_field";
      if (!m.has(scale_key) && !m.has(field_key)) continue;
      p.encodings.push_back({nonempty(m.require(scale_key), m.path(scale_key)),
                             nonempty(m.require(field_key), m.path(field_key))});
    }
    if (p.encodings.empty()) fail(path, n, "needs encodings or x_scale/x_field, y_scale/y_field");
  }
  p.tolerance_px = m.has("tolerance_px") ? positive(m.get("tolerance_px"), m.path("tolerance_px"))
                                         : tol.position_px;
  if (m.has("exact_count")) p.exact_count = boolean(m.get("exact_count"), m.path("exact_count"));
  if (m.has("partial")) p.partial = one_of(m.get("partial"), m.path("partial"), kPartial);
  return p;
}

Check parse_check(const YAML::Node& n, const std::string& path, const Tolerances& tol) {
  if (n.IsMap() && (n["actions"].IsDefined() || n["assert"].IsDefined())) {
    return parse_interaction(MapView(n, path, {"actions", "assert", "fresh_page", "settle_ms"}));
  }
  MapView outer(n, path, {"structure", "layout", "scale", "positions", "sorted", "constant",
                          "color_grouping", "axis_ticks"});
  if (n.size() != 1) fail(path, n, "a check has exactly one kind");
  const auto name = n.begin()->first.Scalar();
  const auto body = n.begin()->second;
  const auto bpath = child(path, name);

  if (name == "structure" || name == "layout") {
    if (!boolean(body, bpath)) fail(bpath, body, "must be true");
    if (name == "structure") return StructureCheck{};
    return LayoutCheck{};
  }
  if (name == "scale") return ScaleCheck{nonempty(body, bpath)};
  if (name == "positions") return parse_positions(body, bpath, tol);
  if (name == "sorted") {
    MapView m(body, bpath, {"marks", "key", "order", "along"});
    SortedCheck s;
    s.marks = selector(m.require("marks"), m.path("marks"));
    s.key = nonempty(m.require("key"), m.path("key"));
    if (m.has("order")) s.order = one_of(m.get("order"), m.path("order"), kOrders);
    if (m.has("along")) s.along = one_of(m.get("along"), m.path("along"), kAxes);
    return s;
  }
  if (name == "constant") {
    MapView m(body, bpath, {"marks", "attribute", "tolerance"});
    ConstantCheck c;
    c.marks = selector(m.require("marks"), m.path("marks"));
    c.attribute = nonempty(m.require("attribute"), m.path("attribute"));
    c.tolerance = m.has("tolerance") ? non_negative(m.get("tolerance"), m.path("tolerance")) : tol.size_px;
    return c;
  }
  if (name == "color_grouping") {
    MapView m(body, bpath, {"groups", "property"});
    ColorGroupingCheck c;
    const auto groups = m.require("groups");
    if (!groups.IsSequence() || groups.size() == 0) fail(m.path("groups"), groups, "needs at least one group");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      MapView g(groups[i], index(m.path("groups"), i), {"marks"});
      c.groups.push_back(selector(g.require("marks"), g.path("marks")));
    }
    if (m.has("property")) c.property = nonempty(m.get("property"), m.path("property"));
    return c;
  }
  // axis_ticks
  MapView m(body, bpath, {"scale", "interval", "unit", "values"});
  AxisTicksCheck a;
  a.scale = nonempty(m.require("scale"), m.path("scale"));
  if (m.has("interval") == m.has("values")) fail(bpath, body, "set exactly one of interval or values");
  if (m.has("interval")) a.interval = positive(m.get("interval"), m.path("interval"));
  if (m.has("unit")) {
    if (!a.interval) fail(m.path("unit"), body, "unit applies to interval only");
    a.unit = one_of(m.get("unit"), m.path("unit"), kUnits);
  }
  if (m.has("values")) {
    const auto values = m.get("values");
    if (!values.IsSequence() || values.size() < 2) fail(m.path("values"), values, "needs at least two values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      a.values.push_back(nonempty(values[i], index(m.path("values"), i)));
    }
  }
  return a;
}

TestSpec parse_test(const YAML::Node& n, const std::string& path, const Tolerances& tol) {
  MapView m(n, path, {"id", "category", "points", "check", "feedback_hint"});
  TestSpec t;
  t.id = nonempty(m.require("id"), m.path("id"));
  t.category = one_of(m.require("category"), m.path("category"), kCategories);
  if (t.category == Category::advisory) {
    if (m.has("points") && non_negative(m.get("points"), m.path("points")) != 0) {
      fail(m.path("points"), m.get("points"), "advisory tests carry 0 points");
    }
  } else {
    t.points = non_negative(m.require("points"), m.path("points"));
  }
  t.check = parse_check(m.require("check"), m.path("check"), tol);
  const bool interaction = std::holds_alternative<InteractionCheck>(t.check);
  if (interaction != (t.category == Category::interaction)) {
    fail(m.path("check"), m.get("check"),
         "interaction tests use an actions/assert check, and only they do");
  }
  if (m.has("feedback_hint")) t.feedback_hint = scalar(m.get("feedback_hint"), m.path("feedback_hint"));
  return t;
}

// ---- references ----

void require_field(const RubricSpec& spec, const std::string& owner, const DatasetField& ref) {
  const auto* ds = spec.find_dataset(ref.dataset);
  if (!ds) throw DanglingReference(owner, ref.dataset);
  if (!ds->has_field(ref.field)) throw DanglingReference(owner, ref.dataset + "." + ref.field);
}

const ScaleSpec& require_scale(const RubricSpec& spec, const std::string& owner, const std::string& id) {
  const auto* s = spec.find_scale(id);
  if (!s) throw DanglingReference(owner, id);
  return *s;
}

void resolve_references(const RubricSpec& spec) {
  for (const auto& s : spec.scales) {
    if (s.color) {
      require_field(spec, s.id, s.color->values);
      if (s.color->join_field) require_field(spec, s.id, {s.color->values.dataset, *s.color->join_field});
    }
    if (s.expected_domain && s.expected_domain->from_dataset) {
      require_field(spec, s.id, *s.expected_domain->from_dataset);
    }
  }
  for (std::size_t i = 0; i < spec.tests.size(); ++i) {
    const auto& t = spec.tests[i];
    const auto path = index("tests", i) + ".check";
    if (const auto* c = std::get_if<ScaleCheck>(&t.check)) {
      require_scale(spec, t.id, c->scale);
    } else if (const auto* p = std::get_if<PositionsCheck>(&t.check)) {
      for (const auto& e : p->encodings) {
        const auto& s = require_scale(spec, t.id, e.scale);
        if (s.kind == ScaleKind::quantile_color) {
          throw SchemaViolation(path + ".positions", "scale '" + e.scale + "' is not positional");
        }
        require_field(spec, t.id, {p->dataset, e.field});
      }
    } else if (const auto* a = std::get_if<AxisTicksCheck>(&t.check)) {
      const auto& s = require_scale(spec, t.id, a->scale);
      if (s.kind == ScaleKind::quantile_color || s.kind == ScaleKind::band) {
        throw SchemaViolation(path + ".axis_ticks.scale", "axis_ticks needs a continuous scale");
      }
      if (a->unit != TimeUnit::none && s.kind != ScaleKind::time) {
        throw SchemaViolation(path + ".axis_ticks.unit", "unit applies to time scales only");
      }
    }
  }
}

RubricSpec parse_document(const YAML::Node& root, const std::filesystem::path& base_dir) {
  MapView top(root, "", {"schema", "meta", "structure", "datasets", "scales", "tests", "tolerances", "live"});
  RubricSpec spec;
  spec.base_dir = base_dir;
  spec.schema = integer(top.require("schema"), "schema", 0, 1'000'000);
  if (spec.schema != kSchemaVersion) {
    fail("schema", top.get("schema"), "unsupported schema version " + std::to_string(spec.schema));
  }
  spec.meta = parse_meta(top.require("meta"));
  if (top.has("structure")) spec.structure = parse_structure(top.get("structure"));
  if (top.has("tolerances")) spec.tolerances = parse_tolerances(top.get("tolerances"));
  if (top.has("live")) spec.live = parse_live(top.get("live"));

  if (top.has("datasets")) {
    const auto ds = top.get("datasets");
    if (!ds.IsMap()) fail("datasets", ds, "expected a mapping of name to CSV path");
    for (const auto& kv : ds) {
      const auto name = scalar(kv.first, "datasets");
      const auto path = child("datasets", name);
      if (spec.dataset_paths.count(name)) fail(path, kv.first, "duplicate key");
      const auto file = nonempty(kv.second, path);
      spec.dataset_paths[name] = file;
      try {
        spec.datasets[name] = Dataset::load_csv(base_dir / file);
      } catch (const std::exception& e) {
        fail(path, kv.second, e.what());
      }
    }
  }

  if (top.has("scales")) {
    const auto scales = top.get("scales");
    if (!scales.IsSequence()) fail("scales", scales, "expected a list");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < scales.size(); ++i) {
      auto s = parse_scale(scales[i], index("scales", i));
      if (!ids.insert(s.id).second) fail(index("scales", i) + ".id", scales[i], "duplicate scale id");
      spec.scales.push_back(std::move(s));
    }
  }

  const auto tests = top.require("tests");
  if (!tests.IsSequence()) fail("tests", tests, "expected a list");
  std::set<std::string> ids;
  double sum = 0;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    auto t = parse_test(tests[i], index("tests", i), spec.tolerances);
    if (!ids.insert(t.id).second) fail(index("tests", i) + ".id", tests[i], "duplicate test id '" + t.id + "'");
    sum += t.points;
    spec.tests.push_back(std::move(t));
  }
  if (std::abs(sum - spec.meta.total_points) > 1e-9 * std::max(1.0, sum)) {
    throw SchemaViolation("meta.total_points", "total_points is " + text::format_exact(spec.meta.total_points) +
                                                   " but the tests sum to " + text::format_exact(sum));
  }
  resolve_references(spec);
  return spec;
}

}  // namespace

RubricSpec parse_rubric(std::string_view yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw YamlSyntax(e.mark.line + 1, e.msg);
  }
  try {
    return parse_document(root, base_dir);
  } catch (const YAML::Exception& e) {
    // Conversion failures that slipped past the explicit checks.
    throw SchemaViolation("(line " + std::to_string(e.mark.line + 1) + ")", e.msg);
  }
}

RubricSpec load_rubric(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaViolation("(file)", "cannot read rubric " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_rubric(buffer.str(), path.parent_path());
}

}  // namespace visgrade::rubric
