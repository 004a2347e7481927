#include "visgrade/rubric/rubric.hpp"

#include <yaml-cpp/yaml.h>

#include "visgrade/text.hpp"

namespace visgrade::rubric {

const ScaleSpec* RubricSpec::find_scale(std::string_view id) const {
  for (const auto& s : scales) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const Dataset* RubricSpec::find_dataset(std::string_view name) const {
  const auto it = datasets.find(std::string(name));
  return it == datasets.end() ? nullptr : &it->second;
}

std::string to_string(Category c) {
  switch (c) {
    case Category::advisory: return "advisory";
    case Category::appearance: return "appearance";
    case Category::positioning: return "positioning";
    case Category::interaction: return "interaction";
  }
  return "?";
}

std::string to_string(ScaleKind k) {
  switch (k) {
    case ScaleKind::linear: return "linear";
    case ScaleKind::log: return "log";
    case ScaleKind::sqrt: return "sqrt";
    case ScaleKind::time: return "time";
    case ScaleKind::band: return "band";
    case ScaleKind::quantile_color: return "quantile-color";
  }
  return "?";
}

std::optional<ScaleKind> scale_kind_from_string(std::string_view s) {
  for (auto k : {ScaleKind::linear, ScaleKind::log, ScaleKind::sqrt, ScaleKind::time, ScaleKind::band,
                 ScaleKind::quantile_color}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::horizontal: return "horizontal";
    case Orientation::vertical: return "vertical";
    case Orientation::color: return "color";
    case Orientation::automatic: return "auto";
  }
  return "?";
}

std::string to_string(SortOrder o) { return o == SortOrder::ascending ? "ascending" : "descending"; }

std::string to_string(SortAxis a) {
  switch (a) {
    case SortAxis::x: return "x";
    case SortAxis::y: return "y";
    case SortAxis::automatic: return "auto";
  }
  return "?";
}

std::string to_string(TimeUnit u) {
  switch (u) {
    case TimeUnit::none: return "none";
    case TimeUnit::year: return "year";
    case TimeUnit::month: return "month";
    case TimeUnit::day: return "day";
  }
  return "?";
}

std::string check_name(const Check& check) {
  struct Visitor {
    std::string operator()(const StructureCheck&) const { return "structure"; }
    std::string operator()(const LayoutCheck&) const { return "layout"; }
    std::string operator()(const ScaleCheck&) const { return "scale"; }
    std::string operator()(const PositionsCheck&) const { return "positions"; }
    std::string operator()(const SortedCheck&) const { return "sorted"; }
    std::string operator()(const ConstantCheck&) const { return "constant"; }
    std::string operator()(const ColorGroupingCheck&) const { return "color_grouping"; }
    std::string operator()(const AxisTicksCheck&) const { return "axis_ticks"; }
    std::string operator()(const InteractionCheck&) const { return "interaction"; }
  };
  return std::visit(Visitor{}, check);
}

// ---- emission ----

namespace {

class Writer {
 public:
  Writer() { out_.SetIndent(2); }

  Writer& key(std::string_view k) {
    out_ << YAML::Key << std::string(k) << YAML::Value;
    return *this;
  }
  Writer& str(std::string_view s) {
    out_ << YAML::DoubleQuoted << std::string(s);
    return *this;
  }
  Writer& num(double v) {
    out_ << text::format_exact(v);
    return *this;
  }
  Writer& boolean(bool b) {
    out_ << (b ? "true" : "false");
    return *this;
  }
  Writer& sel(const dom::Selector& s) { return str(s.expression()); }
  Writer& begin_map() {
    out_ << YAML::BeginMap;
    return *this;
  }
  Writer& end_map() {
    out_ << YAML::EndMap;
    return *this;
  }
  Writer& begin_seq() {
    out_ << YAML::BeginSeq;
    return *this;
  }
  Writer& end_seq() {
    out_ << YAML::EndSeq;
    return *this;
  }
  std::string result() const { return std::string(out_.c_str()) + "\n"; }

 private:
  YAML::Emitter out_;
};

void emit_action(Writer& w, const interact::ActionStep& a) {
  using interact::ActionKind;
  w.begin_map().key(interact::to_string(a.kind));
  switch (a.kind) {
    case ActionKind::pause:
      w.num(a.duration_ms);
      break;
    case ActionKind::select_option:
      w.begin_map().key("target").sel(*a.target).key("value").str(a.option_value).end_map();
      break;
    case ActionKind::drag_to:
      w.begin_map();
      if (a.target) w.key("target").sel(*a.target);
      w.key("destination").sel(*a.destination).end_map();
      break;
    default:
      w.begin_map();
      if (a.target) w.key("target").sel(*a.target);
      w.key("dx").num(a.dx).key("dy").num(a.dy).end_map();
      break;
  }
  w.end_map();
}

void emit_check(Writer& w, const Check& check) {
  w.begin_map();
  if (const auto* c = std::get_if<InteractionCheck>(&check)) {
    w.key("actions").begin_seq();
    for (const auto& a : c->actions) emit_action(w, a);
    w.end_seq().key("assert").begin_seq();
    for (const auto& a : c->assertions) {
      w.begin_map().key("target").sel(a.target).key("relation").str(interact::to_string(a.relation));
      if (!a.attribute.empty()) w.key("attribute").str(a.attribute);
      if (a.literal) w.key("value").str(*a.literal);
      w.key("tolerance").num(a.tolerance).end_map();
    }
    w.end_seq().key("fresh_page").boolean(c->fresh_page);
    if (c->settle_ms) w.key("settle_ms").num(*c->settle_ms);
    w.end_map();
    return;
  }
  w.key(check_name(check));
  if (std::holds_alternative<StructureCheck>(check) || std::holds_alternative<LayoutCheck>(check)) {
    w.boolean(true);
  } else if (const auto* c = std::get_if<ScaleCheck>(&check)) {
    w.str(c->scale);
  } else if (const auto* p = std::get_if<PositionsCheck>(&check)) {
    w.begin_map().key("marks").sel(p->marks).key("dataset").str(p->dataset).key("encodings").begin_seq();
    for (const auto& e : p->encodings) {
      w.begin_map().key("scale").str(e.scale).key("field").str(e.field).end_map();
    }
    w.end_seq().key("tolerance_px").num(p->tolerance_px).key("exact_count").boolean(p->exact_count);
    w.key("partial").str(p->partial == PartialCredit::linear ? "linear" : "none").end_map();
  } else if (const auto* s = std::get_if<SortedCheck>(&check)) {
    w.begin_map().key("marks").sel(s->marks).key("key").str(s->key);
    w.key("order").str(to_string(s->order)).key("along").str(to_string(s->along)).end_map();
  } else if (const auto* c = std::get_if<ConstantCheck>(&check)) {
    w.begin_map().key("marks").sel(c->marks).key("attribute").str(c->attribute);
    w.key("tolerance").num(c->tolerance).end_map();
  } else if (const auto* g = std::get_if<ColorGroupingCheck>(&check)) {
    w.begin_map().key("groups").begin_seq();
    for (const auto& sel : g->groups) w.begin_map().key("marks").sel(sel).end_map();
    w.end_seq().key("property").str(g->property).end_map();
  } else if (const auto* a = std::get_if<AxisTicksCheck>(&check)) {
    w.begin_map().key("scale").str(a->scale);
    if (a->interval) {
      w.key("interval").num(*a->interval);
      if (a->unit != TimeUnit::none) w.key("unit").str(to_string(a->unit));
    } else {
      w.key("values").begin_seq();
      for (const auto& v : a->values) w.str(v);
      w.end_seq();
    }
    w.end_map();
  }
  w.end_map();
}

void emit_scale(Writer& w, const ScaleSpec& s) {
  w.begin_map().key("id").str(s.id).key("kind").str(to_string(s.kind));
  w.key("orientation").str(to_string(s.orientation));
  if (s.axis_group) w.key("axis_group").sel(*s.axis_group);
  if (s.color) {
    const auto& c = *s.color;
    w.key("marks").sel(c.marks).key("dataset").str(c.values.dataset).key("field").str(c.values.field);
    w.key("k").num(c.k).key("property").str(c.property);
    if (c.join_attribute) {
      w.key("join").begin_map().key("attribute").str(*c.join_attribute);
      w.key("field").str(*c.join_field).end_map();
    }
  }
  if (s.expected_domain) {
    w.key("expected_domain");
    if (s.expected_domain->from_dataset) {
      w.begin_map().key("from_dataset").str(s.expected_domain->from_dataset->dataset);
      w.key("field").str(s.expected_domain->from_dataset->field).end_map();
    } else {
      w.begin_seq();
      for (const auto& v : s.expected_domain->literal) w.str(v);
      w.end_seq();
    }
  }
  w.end_map();
}

}  // namespace

std::string to_yaml(const RubricSpec& spec) {
  Writer w;
  w.begin_map().key("schema").num(spec.schema);
  w.key("meta").begin_map().key("name").str(spec.meta.name).key("entry_file").str(spec.meta.entry_file);
  w.key("total_points").num(spec.meta.total_points).end_map();

  w.key("structure").begin_map().key("svg_selector").sel(spec.structure.svg_selector);
  w.key("groups").begin_seq();
  for (const auto& g : spec.structure.groups) w.str(g);
  w.end_seq().key("required").begin_seq();
  for (const auto& r : spec.structure.required) {
    w.begin_map().key("selector").sel(r.selector).key("min_count").num(r.min_count).end_map();
  }
  w.end_seq().end_map();

  const auto& t = spec.tolerances;
  w.key("tolerances").begin_map().key("position_px").num(t.position_px).key("size_px").num(t.size_px);
  w.key("fit_r2").num(t.fit_r2).key("residual_px").num(t.residual_px).end_map();

  const auto& l = spec.live;
  w.key("live").begin_map().key("settle_ms").num(l.settle_ms);
  w.key("viewport").begin_map().key("width").num(l.viewport_width).key("height").num(l.viewport_height).end_map();
  w.key("implicit_wait_ms").num(l.implicit_wait_ms).key("page_load_timeout_ms").num(l.page_load_timeout_ms);
  if (l.ready_selector) w.key("ready_selector").sel(*l.ready_selector);
  w.end_map();

  w.key("datasets").begin_map();
  for (const auto& [name, path] : spec.dataset_paths) w.key(name).str(path);
  w.end_map();

  w.key("scales").begin_seq();
  for (const auto& s : spec.scales) emit_scale(w, s);
  w.end_seq();

  w.key("tests").begin_seq();
  for (const auto& test : spec.tests) {
    w.begin_map().key("id").str(test.id).key("category").str(to_string(test.category));
    w.key("points").num(test.points).key("check");
    emit_check(w, test.check);
    if (test.feedback_hint) w.key("feedback_hint").str(*test.feedback_hint);
    w.end_map();
  }
  w.end_seq().end_map();
  return w.result();
}

std::vector<StructureFinding> validate_structure(const StructureSpec& spec, const dom::Document& doc) {
  std::vector<StructureFinding> findings;
  auto add = [&](const dom::Selector& sel, int min_count) {
    const auto count = dom::select(doc, sel).size();
    findings.push_back({sel.expression(), count >= static_cast<std::size_t>(min_count), count, min_count});
  };
  for (const auto& id : spec.groups) add(dom::Selector::parse("g#" + id), 1);
  for (const auto& r : spec.required) add(r.selector, r.min_count);
  return findings;
}

}  // namespace visgrade::rubric
