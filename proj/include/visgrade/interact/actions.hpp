#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "visgrade/dom/selector.hpp"

namespace visgrade::interact {

enum class ActionKind { move_to, click, double_click, drag_by, drag_to, select_option, pause, scroll_to };

/// One interaction primitive. Which fields apply depends on `kind`:
/// move_to takes a target (or viewport offsets without one), drag_by takes
/// offsets, drag_to a second selector, select_option a value, pause a
/// duration.
struct ActionStep {
  ActionKind kind = ActionKind::move_to;
  std::optional<dom::Selector> target;
  double dx = 0;
  double dy = 0;
  std::optional<dom::Selector> destination;  // drag_to
  std::string option_value;                  // select_option
  int duration_ms = 0;                       // pause

  friend bool operator==(const ActionStep&, const ActionStep&) = default;
};

inline constexpr int kMaxPauseMs = 10'000;

enum class Relation {
  equal,
  changed,
  unchanged,
  greater_than_before,
  less_than_before,
  element_appears,
  element_disappears,
  position_changed
};

/// A predicate over the before/after snapshots of one action chain.
struct StateAssertion {
  dom::Selector target;
  std::string attribute;  // attribute or CSS property; unused by appear/disappear
  Relation relation = Relation::changed;
  std::optional<std::string> literal;  // required by `equal`
  double tolerance = 0.5;              // px, for position_changed

  friend bool operator==(const StateAssertion&, const StateAssertion&) = default;
};

namespace detail {
inline constexpr std::array<std::pair<ActionKind, std::string_view>, 8> kActionNames{{
    {ActionKind::move_to, "move_to"},
    {ActionKind::click, "click"},
    {ActionKind::double_click, "double_click"},
    {ActionKind::drag_by, "drag_by"},
    {ActionKind::drag_to, "drag_to"},
    {ActionKind::select_option, "select_option"},
    {ActionKind::pause, "pause"},
    {ActionKind::scroll_to, "scroll_to"},
}};
inline constexpr std::array<std::pair<Relation, std::string_view>, 8> kRelationNames{{
    {Relation::equal, "equal"},
    {Relation::changed, "changed"},
    {Relation::unchanged, "unchanged"},
    {Relation::greater_than_before, "greater_than_before"},
    {Relation::less_than_before, "less_than_before"},
    {Relation::element_appears, "element_appears"},
    {Relation::element_disappears, "element_disappears"},
    {Relation::position_changed, "position_changed"},
}};
}  // namespace detail

inline std::string to_string(ActionKind kind) {
  for (const auto& [k, name] : detail::kActionNames) {
    if (k == kind) return std::string(name);
  }
  return "?";
}

inline std::optional<ActionKind> action_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : detail::kActionNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

inline std::string to_string(Relation relation) {
  for (const auto& [r, name] : detail::kRelationNames) {
    if (r == relation) return std::string(name);
  }
  return "?";
}

inline std::optional<Relation> relation_from_string(std::string_view name) {
  for (const auto& [r, n] : detail::kRelationNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

}  // namespace visgrade::interact
