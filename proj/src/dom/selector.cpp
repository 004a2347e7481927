#include "visgrade/dom/selector.hpp"

#include <algorithm>
#include <cctype>

#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

[[noreturn]] void invalid(std::string_view expression, const std::string& why) {
  throw InvalidSelector("invalid selector '" + std::string(expression) + "': " + why);
}

}  // namespace

Selector Selector::parse(std::string_view expression) {
  Selector sel;
  sel.expression_ = std::string(text::trim(expression));
  const std::string_view s = sel.expression_;
  if (s.empty()) invalid(expression, "empty expression");

  std::size_t i = 0;
  bool pending_child = false;
  auto read_ident = [&]() {
    const auto start = i;
    while (i < s.size() && is_ident_char(s[i])) ++i;
    if (i == start) invalid(expression, "expected a name at offset " + std::to_string(start));
    return std::string(s.substr(start, i - start));
  };

  while (i < s.size()) {
    Compound step;
    step.child_of_previous = pending_child;
    pending_child = false;
    bool any = false;
    if (s[i] == '*') {
      ++i;
      any = true;
    } else if (is_ident_char(s[i])) {
      step.tag = read_ident();
      any = true;
    }
    while (i < s.size() && (s[i] == '#' || s[i] == '.' || s[i] == ':')) {
      const char kind = s[i++];
      if (kind == '#') {
        step.ids.push_back(read_ident());
      } else if (kind == '.') {
        step.classes.push_back(read_ident());
      } else {
        if (step.nth) invalid(expression, "more than one :nth");
        const std::string pseudo = read_ident();
        if (pseudo != "nth") invalid(expression, "unsupported pseudo-class ':" + pseudo + "'");
        if (i >= s.size() || s[i] != '(') invalid(expression, ":nth requires an argument");
        const auto close = s.find(')', i);
        if (close == std::string_view::npos) invalid(expression, "unterminated :nth(");
        const auto arg = text::trim(s.substr(i + 1, close - i - 1));
        if (arg.empty() || !std::all_of(arg.begin(), arg.end(),
                                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
          invalid(expression, ":nth(k) requires an integer k >= 0");
        }
        step.nth = std::stoull(std::string(arg));
        i = close + 1;
      }
      any = true;
    }
    if (!any) invalid(expression, "unexpected character '" + std::string(1, s[i]) + "'");
    sel.steps_.push_back(std::move(step));

    bool saw_space = false;
    while (i < s.size() && text::is_space(s[i])) {
      ++i;
      saw_space = true;
    }
    if (i < s.size() && s[i] == '>') {
      ++i;
      pending_child = true;
      while (i < s.size() && text::is_space(s[i])) ++i;
      if (i >= s.size()) invalid(expression, "dangling '>' combinator");
    } else if (i < s.size() && !saw_space) {
      invalid(expression, "unexpected character '" + std::string(1, s[i]) + "'");
    }
  }
  return sel;
}

std::vector<const ElementNode*> select(const Document& doc, const ElementNode& scope,
                                       const Selector& selector) {
  auto matches = [](const ElementNode& n, const Selector::Compound& step) {
    if (!step.tag.empty() && !text::iequals(n.tag, step.tag)) return false;
    for (const auto& id : step.ids) {
      if (n.element_id() != id) return false;
    }
    for (const auto& cls : step.classes) {
      if (!n.has_class(cls)) return false;
    }
    return true;
  };
  auto apply_nth = [](std::vector<const ElementNode*>& set, const Selector::Compound& step) {
    if (!step.nth) return;
    if (*step.nth < set.size()) {
      set = {set[*step.nth]};
    } else {
      set.clear();
    }
  };

  std::vector<const ElementNode*> current;
  const auto& first = selector.steps_.front();
  if (matches(scope, first)) current.push_back(&scope);
  for (const auto& d : doc.descendants(scope)) {
    if (matches(d, first)) current.push_back(&d);
  }
  apply_nth(current, first);

  for (std::size_t k = 1; k < selector.steps_.size() && !current.empty(); ++k) {
    const auto& step = selector.steps_[k];
    std::vector<NodeId> anchors;
    for (const auto* c : current) anchors.push_back(c->id);  // sorted: document order
    auto is_anchor = [&](NodeId id) {
      return std::binary_search(anchors.begin(), anchors.end(), id);
    };
    std::vector<const ElementNode*> next;
    // A single forward scan keeps results ordered and duplicate-free.
    for (const auto& d : doc.descendants(scope)) {
      if (!matches(d, step)) continue;
      bool related = false;
      if (step.child_of_previous) {
        related = d.parent && is_anchor(*d.parent);
      } else {
        for (const ElementNode* p = doc.parent(d); p && !related; p = doc.parent(*p)) {
          related = is_anchor(p->id);
          if (p->id == scope.id) break;
        }
      }
      if (related) next.push_back(&d);
    }
    apply_nth(next, step);
    current = std::move(next);
  }
  return current;
}

}  // namespace visgrade::dom
