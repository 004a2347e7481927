#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace visgrade::dom {

/// Stable identifier of a node within one Document. Ids increase in
/// document order.
struct NodeId {
  std::uint32_t value = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Attribute {
  std::string name;
  std::string value;
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Live snapshots carry each element's computed style in this attribute
/// ("fill:rgb(1, 2, 3);opacity:1"). The parser moves it into
/// ElementNode::computed_style and drops it from the attribute list.
inline constexpr std::string_view kComputedStyleAttribute = "data-visgrade-style";

struct ElementNode {
  NodeId id;
  std::optional<NodeId> parent;
  std::string tag;
  std::vector<Attribute> attributes;  // document order, names case-preserved
  std::map<std::string, std::string> computed_style;
  std::string text;  // direct character data, concatenated
  std::vector<NodeId> children;
  bool foreign = false;  // inside an <svg> subtree

  /// Exact name match first, then case-insensitive.
  const std::string* attribute(std::string_view name) const;
  std::string_view element_id() const;
  bool has_class(std::string_view cls) const;
};

/// Immutable parsed snapshot. Nodes are stored in document order; every
/// subtree occupies a contiguous id range.
class Document {
 public:
  const ElementNode& root() const { return nodes_[root_.value]; }
  const ElementNode& node(NodeId id) const { return nodes_.at(id.value); }
  const ElementNode* parent(const ElementNode& n) const;

  /// Root and all of its descendants, in document order.
  std::span<const ElementNode> nodes() const;
  /// Strict descendants of `n`, in document order.
  std::span<const ElementNode> descendants(const ElementNode& n) const;
  bool is_ancestor(const ElementNode& ancestor, const ElementNode& n) const;

  /// Concatenated character data of `n` and its descendants.
  std::string text_content(const ElementNode& n) const;

  /// Child-element indices from the root down to `n` (empty for the root).
  std::vector<std::size_t> path_of(const ElementNode& n) const;
  const ElementNode* at_path(std::span<const std::size_t> path) const;

  /// Document order ancestors from the root down to the parent of `n`.
  std::vector<const ElementNode*> ancestors(const ElementNode& n) const;

 private:
  friend Document parse_snapshot(std::string_view);

  std::vector<ElementNode> nodes_;
  std::vector<std::uint32_t> subtree_end_;  // one past the last descendant
  NodeId root_;
};

/// Lenient HTML/SVG parse with browser-style recovery: unclosed elements are
/// closed by their ancestors' end tags, stray end tags are ignored, void
/// HTML elements never take children. Throws UnparseableDocument when no
/// element can be recovered.
Document parse_snapshot(std::string_view document);

// Style lookup: computed style (live snapshots), then the inline `style`
// attribute, then the presentation attribute. Inherited properties such as
// `fill` continue the lookup on ancestors.
std::map<std::string, std::string> parse_inline_style(std::string_view style);
bool is_inherited_property(std::string_view property);
std::optional<std::string> style_value(const Document& doc, const ElementNode& n,
                                       std::string_view property);

/// Presentation properties are looked up through style_value; anything else
/// is a plain attribute.
bool is_style_property(std::string_view name);
std::optional<std::string> attribute_or_style(const Document& doc, const ElementNode& n,
                                              std::string_view name);

/// False when the element or an ancestor has display:none, opacity 0, or
/// the element is effectively visibility:hidden.
bool is_rendered(const Document& doc, const ElementNode& n);

}  // namespace visgrade::dom
