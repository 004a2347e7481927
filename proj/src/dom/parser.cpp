#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "visgrade/dom/document.hpp"
#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {
namespace {

using text::iequals;
using text::is_space;

constexpr std::array<std::string_view, 14> kVoidElements = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 5> kRawTextElements = {"script", "style", "textarea",
                                                              "title", "xmp"};

// Opening one of these closes an open <p>.
constexpr std::array<std::string_view, 25> kClosesParagraph = {
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "nav", "ol", "p", "pre",
    "section", "table", "ul"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view tag) {
  return std::find(set.begin(), set.end(), tag) != set.end();
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct Entity {
  std::string_view name;
  std::uint32_t codepoint;
};

constexpr std::array<Entity, 16> kEntities = {{{"amp", '&'},
                                                {"apos", '\''},
                                                {"copy", 0xA9},
                                                {"deg", 0xB0},
                                                {"gt", '>'},
                                                {"hellip", 0x2026},
                                                {"laquo", 0xAB},
                                                {"lt", '<'},
                                                {"mdash", 0x2014},
                                                {"middot", 0xB7},
                                                {"minus", 0x2212},
                                                {"nbsp", 0xA0},
                                                {"ndash", 0x2013},
                                                {"quot", '"'},
                                                {"raquo", 0xBB},
                                                {"times", 0xD7}}};

std::string decode_entities(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += '&';
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() > 1 && body[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        const int v = std::isdigit(static_cast<unsigned char>(c))
                          ? c - '0'
                          : (hex && std::isxdigit(static_cast<unsigned char>(c))
                                 ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                                 : -1);
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (ok) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (e.name == body) {
          append_utf8(out, e.codepoint);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi;
    } else {
      out += '&';
    }
  }
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view input) : in_(input) {
    if (in_.substr(0, 3) == "\xEF\xBB\xBF") in_.remove_prefix(3);
    ElementNode document;
    document.tag = "#document";
    nodes_.push_back(std::move(document));
    open_.push_back(0);
  }

  std::vector<ElementNode> build() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '<') {
        if (lookahead("<!--")) {
          skip_past("-->", 4);
        } else if (lookahead("<![CDATA[")) {
          const auto end = in_.find("]]>", pos_ + 9);
          const auto stop = end == std::string_view::npos ? in_.size() : end;
          append_text(in_.substr(pos_ + 9, stop - pos_ - 9), false);
          pos_ = end == std::string_view::npos ? in_.size() : end + 3;
        } else if (lookahead("<!") || lookahead("<?")) {
          skip_past(">", 2);
        } else if (lookahead("</") && pos_ + 2 < in_.size() &&
                   std::isalpha(static_cast<unsigned char>(in_[pos_ + 2]))) {
          end_tag();
        } else if (pos_ + 1 < in_.size() && std::isalpha(static_cast<unsigned char>(in_[pos_ + 1]))) {
          start_tag();
        } else {
          append_text("<", false);
          ++pos_;
        }
      } else {
        const auto next = in_.find('<', pos_);
        const auto stop = next == std::string_view::npos ? in_.size() : next;
        append_text(in_.substr(pos_, stop - pos_), true);
        pos_ = stop;
      }
    }
    return std::move(nodes_);
  }

 private:
  bool lookahead(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void skip_past(std::string_view terminator, std::size_t skip) {
    const auto end = in_.find(terminator, pos_ + skip);
    pos_ = end == std::string_view::npos ? in_.size() : end + terminator.size();
  }

  ElementNode& current() { return nodes_[open_.back()]; }

  void append_text(std::string_view raw, bool decode) {
    if (open_.size() == 1) return;  // character data outside any element
    current().text += decode ? decode_entities(raw) : std::string(raw);
  }

  std::string read_name() {
    const auto start = pos_;
    while (pos_ < in_.size() && is_name_char(in_[pos_])) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < in_.size() && is_space(in_[pos_])) ++pos_;
  }

  void start_tag() {
    ++pos_;  // '<'
    std::string name = read_name();
    const bool parent_foreign = current().foreign && !iequals(current().tag, "foreignObject");
    const bool foreign = parent_foreign || iequals(name, "svg");
    if (!foreign || iequals(name, "svg")) name = text::to_lower(name);

    std::vector<Attribute> attributes;
    bool self_closing = false;
    while (pos_ < in_.size()) {
      skip_space();
      if (pos_ >= in_.size()) break;
      const char c = in_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        skip_space();
        if (pos_ < in_.size() && in_[pos_] == '>') {
          self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      auto attr_start = pos_;
      while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '=' && in_[pos_] != '>' &&
             !(in_[pos_] == '/' && pos_ + 1 < in_.size() && in_[pos_ + 1] == '>')) {
        ++pos_;
      }
      if (pos_ == attr_start) {  // lone '=' or similar junk
        ++pos_;
        continue;
      }
      std::string attr_name(in_.substr(attr_start, pos_ - attr_start));
      if (!foreign) attr_name = text::to_lower(attr_name);
      std::string value;
      skip_space();
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        skip_space();
        if (pos_ < in_.size() && (in_[pos_] == '"' || in_[pos_] == '\'')) {
          const char quote = in_[pos_++];
          const auto end = in_.find(quote, pos_);
          const auto stop = end == std::string_view::npos ? in_.size() : end;
          value = decode_entities(in_.substr(pos_, stop - pos_));
          pos_ = end == std::string_view::npos ? in_.size() : end + 1;
        } else {
          attr_start = pos_;
          while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '>') ++pos_;
          value = decode_entities(in_.substr(attr_start, pos_ - attr_start));
        }
      }
      const bool duplicate = std::any_of(attributes.begin(), attributes.end(),
                                         [&](const Attribute& a) { return a.name == attr_name; });
      if (!duplicate) attributes.push_back({std::move(attr_name), std::move(value)});
    }

    if (!foreign) close_implied_by(name);

    ElementNode node;
    node.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
    node.parent = NodeId{open_.back()};
    node.tag = name;
    node.foreign = foreign;
    for (auto& attr : attributes) {
      if (attr.name == kComputedStyleAttribute) {
        node.computed_style = parse_inline_style(attr.value);
        std::erase_if(node.computed_style, [](const auto& kv) { return kv.second.empty(); });
      } else {
        node.attributes.push_back(std::move(attr));
      }
    }
    current().children.push_back(node.id);
    const auto index = node.id.value;
    nodes_.push_back(std::move(node));

    if (!foreign && contains(kVoidElements, name)) return;
    if (self_closing && foreign) return;
    open_.push_back(index);

    if (!foreign && contains(kRawTextElements, name)) {
      const std::string close = "</" + name;
      auto end = pos_;
      while (true) {
        end = in_.find("</", end);
        if (end == std::string_view::npos || iequals(in_.substr(end, close.size()), close)) break;
        end += 2;
      }
      const auto stop = end == std::string_view::npos ? in_.size() : end;
      append_text(in_.substr(pos_, stop - pos_), name == "title" || name == "textarea");
      pos_ = stop;
    }
  }

  void close_implied_by(std::string_view tag) {
    auto current_is = [&](std::string_view t) { return open_.size() > 1 && current().tag == t; };
    if (contains(kClosesParagraph, tag) && current_is("p")) pop();
    if (tag == "li") close_nearest("li", {"ul", "ol"});
    if (tag == "dt" || tag == "dd") {
      if (current_is("dt") || current_is("dd")) pop();
    }
    if (tag == "option" && current_is("option")) pop();
    if (tag == "optgroup") {
      if (current_is("option")) pop();
      if (current_is("optgroup")) pop();
    }
    if (tag == "td" || tag == "th") {
      if (current_is("td") || current_is("th")) pop();
    }
    if (tag == "tr") {
      if (current_is("td") || current_is("th")) pop();
      if (current_is("tr")) pop();
    }
  }

  void close_nearest(std::string_view tag, std::initializer_list<std::string_view> boundaries) {
    for (auto i = open_.size(); i-- > 1;) {
      const auto& t = nodes_[open_[i]].tag;
      if (t == tag) {
        open_.resize(i);
        return;
      }
      if (std::find(boundaries.begin(), boundaries.end(), t) != boundaries.end()) return;
    }
  }

  void pop() {
    if (open_.size() > 1) open_.pop_back();
  }

  void end_tag() {
    pos_ += 2;
    const std::string name = read_name();
    skip_past(">", 0);
    for (auto i = open_.size(); i-- > 1;) {
      if (iequals(nodes_[open_[i]].tag, name)) {
        open_.resize(i);
        return;
      }
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::vector<ElementNode> nodes_;
  std::vector<std::uint32_t> open_;
};

}  // namespace

Document parse_snapshot(std::string_view input) {
  Document doc;
  doc.nodes_ = TreeBuilder(input).build();
  const auto& top = doc.nodes_.front();
  if (top.children.empty()) {
    throw UnparseableDocument("no element could be recovered from the document");
  }
  if (top.children.size() == 1) {
    doc.root_ = top.children.front();
    doc.nodes_[doc.root_.value].parent.reset();
  } else {
    doc.root_ = NodeId{0};
  }

  doc.subtree_end_.assign(doc.nodes_.size(), 0);
  for (auto i = doc.nodes_.size(); i-- > 0;) {
    const auto& n = doc.nodes_[i];
    std::uint32_t end = static_cast<std::uint32_t>(i) + 1;
    if (!n.children.empty()) end = doc.subtree_end_[n.children.back().value];
    doc.subtree_end_[i] = end;
  }
  return doc;
}

}  // namespace visgrade::dom
