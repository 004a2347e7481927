#include <algorithm>
#include <array>

#include "visgrade/dom/document.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {

const std::string* ElementNode::attribute(std::string_view name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return &a.value;
  }
  for (const auto& a : attributes) {
    if (text::iequals(a.name, name)) return &a.value;
  }
  return nullptr;
}

std::string_view ElementNode::element_id() const {
  const auto* v = attribute("id");
  return v ? std::string_view(*v) : std::string_view();
}

bool ElementNode::has_class(std::string_view cls) const {
  const auto* v = attribute("class");
  if (!v) return false;
  std::string_view rest = *v;
  while (!rest.empty()) {
    while (!rest.empty() && text::is_space(rest.front())) rest.remove_prefix(1);
    std::size_t n = 0;
    while (n < rest.size() && !text::is_space(rest[n])) ++n;
    if (n > 0 && rest.substr(0, n) == cls) return true;
    rest.remove_prefix(n);
  }
  return false;
}

const ElementNode* Document::parent(const ElementNode& n) const {
  return n.parent ? &nodes_[n.parent->value] : nullptr;
}

std::span<const ElementNode> Document::nodes() const {
  return std::span<const ElementNode>(nodes_).subspan(root_.value,
                                                      subtree_end_[root_.value] - root_.value);
}

std::span<const ElementNode> Document::descendants(const ElementNode& n) const {
  const auto first = n.id.value + 1;
  return std::span<const ElementNode>(nodes_).subspan(first, subtree_end_[n.id.value] - first);
}

bool Document::is_ancestor(const ElementNode& ancestor, const ElementNode& n) const {
  return n.id.value > ancestor.id.value && n.id.value < subtree_end_[ancestor.id.value];
}

std::string Document::text_content(const ElementNode& n) const {
  std::string out = n.text;
  for (const auto& d : descendants(n)) out += d.text;
  return out;
}

std::vector<std::size_t> Document::path_of(const ElementNode& n) const {
  std::vector<std::size_t> path;
  const ElementNode* cur = &n;
  while (cur->id != root_) {
    const ElementNode* p = parent(*cur);
    if (!p) break;
    const auto it = std::find(p->children.begin(), p->children.end(), cur->id);
    path.push_back(static_cast<std::size_t>(it - p->children.begin()));
    cur = p;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

const ElementNode* Document::at_path(std::span<const std::size_t> path) const {
  const ElementNode* cur = &root();
  for (auto index : path) {
    if (index >= cur->children.size()) return nullptr;
    cur = &node(cur->children[index]);
  }
  return cur;
}

std::vector<const ElementNode*> Document::ancestors(const ElementNode& n) const {
  std::vector<const ElementNode*> chain;
  for (const ElementNode* p = parent(n); p; p = parent(*p)) {
    chain.push_back(p);
    if (p->id == root_) break;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::map<std::string, std::string> parse_inline_style(std::string_view style) {
  std::map<std::string, std::string> out;
  for (auto decl : text::split(style, ';')) {
    const auto colon = decl.find(':');
    if (colon == std::string_view::npos) continue;
    const auto name = text::trim(decl.substr(0, colon));
    auto value = text::trim(decl.substr(colon + 1));
    if (const auto bang = value.find("!important"); bang != std::string_view::npos) {
      value = text::trim(value.substr(0, bang));
    }
    if (!name.empty()) out[text::to_lower(name)] = std::string(value);
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, 14> kInherited = {
    "color",       "fill",        "fill-opacity", "fill-rule",    "font-family",
    "font-size",   "font-style",  "font-weight",  "stroke",       "stroke-dasharray",
    "stroke-opacity", "stroke-width", "text-anchor", "visibility"};

constexpr std::array<std::string_view, 8> kNonInheritedStyle = {
    "display", "opacity", "cursor", "pointer-events", "background-color", "transition",
    "transform-origin", "mix-blend-mode"};

std::optional<std::string> own_style(const ElementNode& n, std::string_view property) {
  if (auto it = n.computed_style.find(std::string(property)); it != n.computed_style.end()) {
    return it->second;
  }
  if (const auto* inline_style = n.attribute("style")) {
    auto parsed = parse_inline_style(*inline_style);
    if (auto it = parsed.find(std::string(property)); it != parsed.end()) return it->second;
  }
  if (const auto* attr = n.attribute(property)) return *attr;
  return std::nullopt;
}

}  // namespace

bool is_inherited_property(std::string_view property) {
  return std::find(kInherited.begin(), kInherited.end(), property) != kInherited.end();
}

bool is_style_property(std::string_view name) {
  return is_inherited_property(name) ||
         std::find(kNonInheritedStyle.begin(), kNonInheritedStyle.end(), name) !=
             kNonInheritedStyle.end();
}

std::optional<std::string> style_value(const Document& doc, const ElementNode& n,
                                       std::string_view property) {
  const ElementNode* cur = &n;
  while (cur) {
    auto v = own_style(*cur, property);
    if (v && *v != "inherit") return v;
    if (!is_inherited_property(property) && !(v && *v == "inherit")) return std::nullopt;
    cur = doc.parent(*cur);
  }
  return std::nullopt;
}

std::optional<std::string> attribute_or_style(const Document& doc, const ElementNode& n,
                                              std::string_view name) {
  if (is_style_property(name)) return style_value(doc, n, name);
  if (const auto* v = n.attribute(name)) return *v;
  if (auto it = n.computed_style.find(std::string(name)); it != n.computed_style.end()) {
    return it->second;
  }
  return std::nullopt;
}

bool is_rendered(const Document& doc, const ElementNode& n) {
  for (const ElementNode* cur = &n; cur; cur = doc.parent(*cur)) {
    if (auto display = own_style(*cur, "display"); display && text::trim(*display) == "none") {
      return false;
    }
    if (auto opacity = own_style(*cur, "opacity")) {
      if (auto v = text::parse_double(text::trim(*opacity)); v && *v <= 0.0) return false;
    }
  }
  if (auto visibility = style_value(doc, n, "visibility")) {
    const auto v = text::trim(*visibility);
    if (v == "hidden" || v == "collapse") return false;
  }
  return true;
}

}  // namespace visgrade::dom
