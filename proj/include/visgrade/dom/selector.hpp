#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "visgrade/dom/document.hpp"

namespace visgrade::dom {

/// A compiled selector in the small CSS subset rubrics use:
///
///   selector := compound (combinator compound)*
///   compound := (tag | '*')? ('#' id | '.' class)* (':nth(' k ')')?
///   combinator := whitespace (descendant) | '>' (child)
///
/// `:nth(k)` keeps only the k-th (zero-based) element matched so far, so
/// "g#circles circle:nth(3)" is the fourth circle under g#circles.
class Selector {
 public:
  /// Throws InvalidSelector.
  static Selector parse(std::string_view expression);

  const std::string& expression() const { return expression_; }

  friend bool operator==(const Selector& a, const Selector& b) {
    return a.expression_ == b.expression_;
  }

 private:
  friend std::vector<const ElementNode*> select(const Document&, const ElementNode&,
                                                const Selector&);

  struct Compound {
    std::string tag;  // empty matches any
    std::vector<std::string> ids;
    std::vector<std::string> classes;
    std::optional<std::size_t> nth;
    bool child_of_previous = false;
  };

  std::string expression_;
  std::vector<Compound> steps_;
};

/// Matches in document order among `scope` and its descendants.
std::vector<const ElementNode*> select(const Document& doc, const ElementNode& scope,
                                       const Selector& selector);

inline std::vector<const ElementNode*> select(const Document& doc, const Selector& selector) {
  return select(doc, doc.root(), selector);
}

}  // namespace visgrade::dom
