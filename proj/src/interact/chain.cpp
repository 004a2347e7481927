#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "visgrade/dom/color.hpp"
#include "visgrade/dom/geometry.hpp"
#include "visgrade/error.hpp"
#include "visgrade/interact/session.hpp"
#include "visgrade/text.hpp"

namespace visgrade::interact {

// ---- deltas ----

namespace {

void diff_subtree(const dom::Document& before, const dom::ElementNode& b, const dom::Document& after,
                  const dom::ElementNode& a, std::vector<std::size_t>& path, std::vector<NodeChange>& out) {
  using Kind = NodeChange::Kind;
  if (b.tag != a.tag) {
    out.push_back({Kind::removed, path, b.tag, b.tag, std::nullopt});
    out.push_back({Kind::added, path, a.tag, std::nullopt, a.tag});
    return;
  }
  std::map<std::string, std::string> ba, aa;
  for (const auto& attr : b.attributes) ba[attr.name] = attr.value;
  for (const auto& attr : a.attributes) aa[attr.name] = attr.value;
  for (const auto& [name, value] : ba) {
    const auto it = aa.find(name);
    if (it == aa.end()) out.push_back({Kind::attribute, path, name, value, std::nullopt});
    else if (it->second != value) out.push_back({Kind::attribute, path, name, value, it->second});
  }
  for (const auto& [name, value] : aa) {
    if (!ba.contains(name)) out.push_back({Kind::attribute, path, name, std::nullopt, value});
  }
  for (const auto& [name, value] : b.computed_style) {
    const auto it = a.computed_style.find(name);
    if (it == a.computed_style.end()) out.push_back({Kind::style, path, name, value, std::nullopt});
    else if (it->second != value) out.push_back({Kind::style, path, name, value, it->second});
  }
  for (const auto& [name, value] : a.computed_style) {
    if (!b.computed_style.contains(name)) out.push_back({Kind::style, path, name, std::nullopt, value});
  }
  if (b.text != a.text) out.push_back({Kind::text, path, "#text", b.text, a.text});

  const std::size_t common = std::min(b.children.size(), a.children.size());
  for (std::size_t i = 0; i < common; ++i) {
    path.push_back(i);
    diff_subtree(before, before.node(b.children[i]), after, after.node(a.children[i]), path, out);
    path.pop_back();
  }
  for (std::size_t i = common; i < b.children.size(); ++i) {
    path.push_back(i);
    const auto& tag = before.node(b.children[i]).tag;
    out.push_back({Kind::removed, path, tag, tag, std::nullopt});
    path.pop_back();
  }
  for (std::size_t i = common; i < a.children.size(); ++i) {
    path.push_back(i);
    const auto& tag = after.node(a.children[i]).tag;
    out.push_back({Kind::added, path, tag, std::nullopt, tag});
    path.pop_back();
  }
}

}  // namespace

std::vector<NodeChange> diff_documents(const dom::Document& before, const dom::Document& after) {
  std::vector<NodeChange> out;
  std::vector<std::size_t> path;
  diff_subtree(before, before.root(), after, after.root(), path, out);
  return out;
}

DomDelta make_delta(std::string before_markup, std::string after_markup) {
  DomDelta d;
  d.before = dom::parse_snapshot(before_markup);
  d.after = dom::parse_snapshot(after_markup);
  d.changed_nodes = diff_documents(d.before, d.after);
  d.before_markup = std::move(before_markup);
  d.after_markup = std::move(after_markup);
  return d;
}

// ---- action chains ----

namespace {

constexpr int kDragSteps = 5;

Json pointer_move(double x, double y, const Json& origin, int duration = 0) {
  return {{"type", "pointerMove"},
          {"x", static_cast<long long>(std::lround(x))},
          {"y", static_cast<long long>(std::lround(y))},
          {"origin", origin},
          {"duration", duration}};
}

Json element_origin(const std::string& element) { return {{kElementKey, element}}; }

Json button(const char* type) { return {{"type", type}, {"button", 0}}; }

/// Integer pointer deltas summing exactly to the total.
std::vector<long long> split_travel(double total) {
  const long long whole = std::lround(total);
  std::vector<long long> parts;
  long long done = 0;
  for (int i = 1; i <= kDragSteps; ++i) {
    const long long upto = whole * i / kDragSteps;
    parts.push_back(upto - done);
    done = upto;
  }
  return parts;
}

}  // namespace

Json build_actions(const ActionStep& step, const std::optional<std::string>& target,
                   std::optional<std::pair<double, double>> travel) {
  Json seq = Json::array();
  auto press_at_target = [&] {
    if (target) seq.push_back(pointer_move(0, 0, element_origin(*target)));
  };
  switch (step.kind) {
    case ActionKind::move_to:
      if (target) seq.push_back(pointer_move(step.dx, step.dy, element_origin(*target)));
      else seq.push_back(pointer_move(step.dx, step.dy, "viewport"));
      break;
    case ActionKind::click:
      press_at_target();
      seq.push_back(button("pointerDown"));
      seq.push_back(button("pointerUp"));
      break;
    case ActionKind::double_click:
      press_at_target();
      for (int i = 0; i < 2; ++i) {
        seq.push_back(button("pointerDown"));
        seq.push_back(button("pointerUp"));
      }
      break;
    case ActionKind::drag_by:
    case ActionKind::drag_to: {
      const auto [tx, ty] = step.kind == ActionKind::drag_by ? std::pair{step.dx, step.dy}
                                                             : travel.value_or(std::pair{0.0, 0.0});
      press_at_target();
      seq.push_back(button("pointerDown"));
      const auto xs = split_travel(tx), ys = split_travel(ty);
      for (int i = 0; i < kDragSteps; ++i) {
        seq.push_back(pointer_move(static_cast<double>(xs[i]), static_cast<double>(ys[i]), "pointer", 20));
      }
      seq.push_back(button("pointerUp"));
      break;
    }
    case ActionKind::pause:
      seq.push_back({{"type", "pause"}, {"duration", std::clamp(step.duration_ms, 0, kMaxPauseMs)}});
      break;
    case ActionKind::select_option:
    case ActionKind::scroll_to:
      // Driven through scripts and element clicks, not pointer input.
      break;
  }
  return Json::array(
      {{{"type", "pointer"}, {"id", "mouse"}, {"parameters", {{"pointerType", "mouse"}}}, {"actions", seq}}});
}

namespace {

const char* kOptionScript = R"~(/* visgrade-option */
const select = arguments[0], wanted = arguments[1];
for (const o of select.options) {
  if (o.value === wanted || o.text.trim() === wanted) {
    select.value = o.value;
    select.dispatchEvent(new Event('input', {bubbles: true}));
    select.dispatchEvent(new Event('change', {bubbles: true}));
    return true;
  }
}
return false;
)~";

const char* kScrollScript = R"~(/* visgrade-scroll */
arguments[0].scrollIntoView({block: 'center', inline: 'center'});
return true;
)~";

std::string resolve(BrowserSession& session, const dom::Selector& selector, std::size_t index) {
  auto element = session.find_element(selector);
  if (!element) throw TargetNotFound(selector.expression(), index);
  return *element;
}

void run_step(BrowserSession& session, const ActionStep& step, std::size_t index) {
  const bool needs_target = step.kind == ActionKind::drag_to || step.kind == ActionKind::select_option ||
                            step.kind == ActionKind::scroll_to;
  if (needs_target && !step.target) throw ChainInterrupted(index, to_string(step.kind) + " needs a target");
  std::optional<std::string> target;
  if (step.target) target = resolve(session, *step.target, index);

  try {
    switch (step.kind) {
      case ActionKind::select_option: {
        const auto ok = session.execute(kOptionScript, Json::array({element_origin(*target), step.option_value}));
        if (ok != true) throw ChainInterrupted(index, fmt::format("no option '{}' in '{}'", step.option_value,
                                                                 step.target->expression()));
        return;
      }
      case ActionKind::scroll_to:
        session.execute(kScrollScript, Json::array({element_origin(*target)}));
        return;
      case ActionKind::drag_to: {
        if (!step.destination) throw ChainInterrupted(index, "drag_to needs a destination");
        const auto dest = resolve(session, *step.destination, index);
        const auto from = session.element_rect(*target), to = session.element_rect(dest);
        const std::pair travel{(to.x + to.width / 2) - (from.x + from.width / 2),
                               (to.y + to.height / 2) - (from.y + from.height / 2)};
        session.perform_actions(build_actions(step, target, travel));
        return;
      }
      default:
        session.perform_actions(build_actions(step, target));
        return;
    }
  } catch (const ChainInterrupted&) {
    throw;
  } catch (const TargetNotFound&) {
    throw;
  } catch (const Error& e) {
    throw ChainInterrupted(index, e.what());
  }
}

}  // namespace

DomDelta run_chain(BrowserSession& session, const std::vector<ActionStep>& steps, int settle_ms) {
  std::string before = session.serialize_dom();
  for (std::size_t i = 0; i < steps.size(); ++i) run_step(session, steps[i], i);
  if (!steps.empty()) {
    try {
      session.release_actions();
    } catch (const ProtocolError&) {
      // Releasing only resets input state; a failure leaves the chain's effects intact.
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(std::max(settle_ms, 0)));
  }
  return make_delta(std::move(before), session.serialize_dom());
}

// ---- assertions ----

namespace {

struct Canonical {
  std::optional<double> number;
  std::optional<dom::Rgba> color;
  std::string text;

  std::string describe() const {
    if (number) return text::format_exact(*number);
    if (color) return dom::to_string(*color);
    return "'" + text + "'";
  }
};

Canonical canonical(std::string_view raw) {
  Canonical c;
  c.text = std::string(text::trim(raw));
  if ((c.number = text::parse_length(c.text))) return c;
  try {
    c.color = dom::parse_color(c.text);
  } catch (const UnknownColor&) {
  }
  return c;
}

bool same(const Canonical& a, const Canonical& b) {
  constexpr double kEps = 1e-6;
  if (a.number && b.number) return std::abs(*a.number - *b.number) <= kEps * std::max(1.0, std::abs(*a.number));
  if (a.color && b.color) return *a.color == *b.color;
  return a.text == b.text;
}

std::optional<dom::Point> center(const dom::Document& doc, const dom::ElementNode& n) {
  try {
    const auto g = dom::resolve_geometry(doc, n);
    if (g.cx && g.cy) return dom::Point{*g.cx, *g.cy};
    if (g.x && g.y) return dom::Point{*g.x + g.width.value_or(0) / 2, *g.y + g.height.value_or(0) / 2};
    if (g.path_points && !g.path_points->empty()) {
      double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
      for (const auto& p : *g.path_points) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
      }
      return dom::Point{(x0 + x1) / 2, (y0 + y1) / 2};
    }
    return dom::element_ctm(doc, n).apply({0, 0});
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::size_t visible_count(const dom::Document& doc, const dom::Selector& sel) {
  const auto matches = dom::select(doc, sel);
  return static_cast<std::size_t>(
      std::count_if(matches.begin(), matches.end(), [&](const auto* n) { return dom::is_rendered(doc, *n); }));
}

checks::CheckResult count_change(const DomDelta& delta, const StateAssertion& a) {
  const auto before = visible_count(delta.before, a.target), after = visible_count(delta.after, a.target);
  const bool appears = a.relation == Relation::element_appears;
  const bool ok = appears ? after > before : after < before;
  const auto line = fmt::format("'{}': {} visible before, {} after", a.target.expression(), before, after);
  if (ok) return checks::pass({line});
  return checks::fail(appears ? "more visible matches after the interaction" : "fewer visible matches after the interaction",
                      fmt::format("{} before, {} after", before, after), {line});
}

}  // namespace

checks::CheckResult assert_state(const DomDelta& delta, const StateAssertion& a) {
  if (a.relation == Relation::element_appears || a.relation == Relation::element_disappears) {
    return count_change(delta, a);
  }
  const auto& sel = a.target.expression();
  const auto after_matches = dom::select(delta.after, a.target);
  if (after_matches.empty()) {
    return checks::fail(fmt::format("an element matching '{}' after the interaction", sel), "no match",
                        {fmt::format("Could not find '{}' after the interaction", sel)});
  }
  const dom::ElementNode& after_node = *after_matches.front();
  const dom::ElementNode* before_node = nullptr;
  if (const auto* same_place = delta.before.at_path(delta.after.path_of(after_node))) {
    const auto before_matches = dom::select(delta.before, a.target);
    if (std::find(before_matches.begin(), before_matches.end(), same_place) != before_matches.end()) {
      before_node = same_place;
    }
  }
  if (!before_node) {
    const auto before_matches = dom::select(delta.before, a.target);
    if (!before_matches.empty()) before_node = before_matches.front();
  }

  if (a.relation == Relation::position_changed) {
    const auto p1 = center(delta.after, after_node);
    const auto p0 = before_node ? center(delta.before, *before_node) : std::nullopt;
    if (!p0 || !p1) {
      return checks::fail("a measurable position before and after", "position unavailable",
                          {fmt::format("Could not locate '{}' in both snapshots", sel)});
    }
    const double moved = std::hypot(p1->x - p0->x, p1->y - p0->y);
    const auto line = fmt::format("'{}' moved from ({}, {}) to ({}, {}), {}px", sel, text::format_number(p0->x),
                                  text::format_number(p0->y), text::format_number(p1->x),
                                  text::format_number(p1->y), text::format_number(moved));
    if (moved > a.tolerance) return checks::pass({line});
    return checks::fail(fmt::format("moved by more than {}px", text::format_number(a.tolerance)),
                        fmt::format("moved {}px", text::format_number(moved)), {line});
  }

  const auto after_raw = dom::attribute_or_style(delta.after, after_node, a.attribute);
  if (a.relation == Relation::equal) {
    const auto want = canonical(a.literal.value_or(""));
    if (!after_raw) {
      return checks::fail(want.describe(), "not set",
                          {fmt::format("'{}' has no {} after the interaction", sel, a.attribute)});
    }
    const auto got = canonical(*after_raw);
    const auto line = fmt::format("{} of '{}' after the interaction is {}", a.attribute, sel, got.describe());
    if (same(got, want)) return checks::pass({line});
    return checks::fail(want.describe(), got.describe(), {line});
  }

  if (!before_node) {
    return checks::fail(fmt::format("'{}' present before the interaction", sel), "no match",
                        {fmt::format("Could not find '{}' before the interaction", sel)});
  }
  const auto before_raw = dom::attribute_or_style(delta.before, *before_node, a.attribute);
  const auto b = canonical(before_raw.value_or("")), c = canonical(after_raw.value_or(""));
  const auto show = [](const std::optional<std::string>& raw, const Canonical& v) {
    return raw ? v.describe() : std::string("unset");
  };
  const auto line = fmt::format("{} of '{}': {} before, {} after", a.attribute, sel, show(before_raw, b),
                                show(after_raw, c));
  const bool unchanged = before_raw.has_value() == after_raw.has_value() && same(b, c);

  switch (a.relation) {
    case Relation::changed:
      if (!unchanged) return checks::pass({line});
      return checks::fail(fmt::format("{} to change", a.attribute), "no change detected", {line});
    case Relation::unchanged:
      if (unchanged) return checks::pass({line});
      return checks::fail(fmt::format("{} to stay {}", a.attribute, show(before_raw, b)), show(after_raw, c), {line});
    case Relation::greater_than_before:
    case Relation::less_than_before: {
      const bool greater = a.relation == Relation::greater_than_before;
      const auto want = fmt::format("{} {} than before", a.attribute, greater ? "greater" : "less");
      if (!b.number || !c.number) return checks::fail(want, "a non-numeric value", {line});
      const bool ok = greater ? *c.number > *b.number && !same(b, c) : *c.number < *b.number && !same(b, c);
      if (ok) return checks::pass({line});
      return checks::fail(want, fmt::format("{} then {}", b.describe(), c.describe()), {line});
    }
    default:
      return checks::fail("a supported relation", to_string(a.relation), {line});
  }
}

}  // namespace visgrade::interact
