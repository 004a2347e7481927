#include "visgrade/dom/color.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <tuple>
#include <vector>

#include "visgrade/error.hpp"
#include "visgrade/text.hpp"

namespace visgrade::dom {
using namespace visgrade::text;
namespace {

struct NamedColor {
  std::string_view name;
  std::uint8_t r, g, b;
};

// CSS Color Module Level 4 named colors, sorted by name.
constexpr std::array<NamedColor, 148> kNamedColors{{
    {"aliceblue", 240, 248, 255},
    {"antiquewhite", 250, 235, 215},
    {"aqua", 0, 255, 255},
    {"aquamarine", 127, 255, 212},
    {"azure", 240, 255, 255},
    {"beige", 245, 245, 220},
    {"bisque", 255, 228, 196},
    {"black", 0, 0, 0},
    {"blanchedalmond", 255, 235, 205},
    {"blue", 0, 0, 255},
    {"blueviolet", 138, 43, 226},
    {"brown", 165, 42, 42},
    {"burlywood", 222, 184, 135},
    {"cadetblue", 95, 158, 160},
    {"chartreuse", 127, 255, 0},
    {"chocolate", 210, 105, 30},
    {"coral", 255, 127, 80},
    {"cornflowerblue", 100, 149, 237},
    {"cornsilk", 255, 248, 220},
    {"crimson", 220, 20, 60},
    {"cyan", 0, 255, 255},
    {"darkblue", 0, 0, 139},
    {"darkcyan", 0, 139, 139},
    {"darkgoldenrod", 184, 134, 11},
    {"darkgray", 169, 169, 169},
    {"darkgreen", 0, 100, 0},
    {"darkgrey", 169, 169, 169},
    {"darkkhaki", 189, 183, 107},
    {"darkmagenta", 139, 0, 139},
    {"darkolivegreen", 85, 107, 47},
    {"darkorange", 255, 140, 0},
    {"darkorchid", 153, 50, 204},
    {"darkred", 139, 0, 0},
    {"darksalmon", 233, 150, 122},
    {"darkseagreen", 143, 188, 143},
    {"darkslateblue", 72, 61, 139},
    {"darkslategray", 47, 79, 79},
    {"darkslategrey", 47, 79, 79},
    {"darkturquoise", 0, 206, 209},
    {"darkviolet", 148, 0, 211},
    {"deeppink", 255, 20, 147},
    {"deepskyblue", 0, 191, 255},
    {"dimgray", 105, 105, 105},
    {"dimgrey", 105, 105, 105},
    {"dodgerblue", 30, 144, 255},
    {"firebrick", 178, 34, 34},
    {"floralwhite", 255, 250, 240},
    {"forestgreen", 34, 139, 34},
    {"fuchsia", 255, 0, 255},
    {"gainsboro", 220, 220, 220},
    {"ghostwhite", 248, 248, 255},
    {"gold", 255, 215, 0},
    {"goldenrod", 218, 165, 32},
    {"gray", 128, 128, 128},
    {"green", 0, 128, 0},
    {"greenyellow", 173, 255, 47},
    {"grey", 128, 128, 128},
    {"honeydew", 240, 255, 240},
    {"hotpink", 255, 105, 180},
    {"indianred", 205, 92, 92},
    {"indigo", 75, 0, 130},
    {"ivory", 255, 255, 240},
    {"khaki", 240, 230, 140},
    {"lavender", 230, 230, 250},
    {"lavenderblush", 255, 240, 245},
    {"lawngreen", 124, 252, 0},
    {"lemonchiffon", 255, 250, 205},
    {"lightblue", 173, 216, 230},
    {"lightcoral", 240, 128, 128},
    {"lightcyan", 224, 255, 255},
    {"lightgoldenrodyellow", 250, 250, 210},
    {"lightgray", 211, 211, 211},
    {"lightgreen", 144, 238, 144},
    {"lightgrey", 211, 211, 211},
    {"lightpink", 255, 182, 193},
    {"lightsalmon", 255, 160, 122},
    {"lightseagreen", 32, 178, 170},
    {"lightskyblue", 135, 206, 250},
    {"lightslategray", 119, 136, 153},
    {"lightslategrey", 119, 136, 153},
    {"lightsteelblue", 176, 196, 222},
    {"lightyellow", 255, 255, 224},
    {"lime", 0, 255, 0},
    {"limegreen", 50, 205, 50},
    {"linen", 250, 240, 230},
    {"magenta", 255, 0, 255},
    {"maroon", 128, 0, 0},
    {"mediumaquamarine", 102, 205, 170},
    {"mediumblue", 0, 0, 205},
    {"mediumorchid", 186, 85, 211},
    {"mediumpurple", 147, 112, 219},
    {"mediumseagreen", 60, 179, 113},
    {"mediumslateblue", 123, 104, 238},
    {"mediumspringgreen", 0, 250, 154},
    {"mediumturquoise", 72, 209, 204},
    {"mediumvioletred", 199, 21, 133},
    {"midnightblue", 25, 25, 112},
    {"mintcream", 245, 255, 250},
    {"mistyrose", 255, 228, 225},
    {"moccasin", 255, 228, 181},
    {"navajowhite", 255, 222, 173},
    {"navy", 0, 0, 128},
    {"oldlace", 253, 245, 230},
    {"olive", 128, 128, 0},
    {"olivedrab", 107, 142, 35},
    {"orange", 255, 165, 0},
    {"orangered", 255, 69, 0},
    {"orchid", 218, 112, 214},
    {"palegoldenrod", 238, 232, 170},
    {"palegreen", 152, 251, 152},
    {"paleturquoise", 175, 238, 238},
    {"palevioletred", 219, 112, 147},
    {"papayawhip", 255, 239, 213},
    {"peachpuff", 255, 218, 185},
    {"peru", 205, 133, 63},
    {"pink", 255, 192, 203},
    {"plum", 221, 160, 221},
    {"powderblue", 176, 224, 230},
    {"purple", 128, 0, 128},
    {"rebeccapurple", 102, 51, 153},
    {"red", 255, 0, 0},
    {"rosybrown", 188, 143, 143},
    {"royalblue", 65, 105, 225},
    {"saddlebrown", 139, 69, 19},
    {"salmon", 250, 128, 114},
    {"sandybrown", 244, 164, 96},
    {"seagreen", 46, 139, 87},
    {"seashell", 255, 245, 238},
    {"sienna", 160, 82, 45},
    {"silver", 192, 192, 192},
    {"skyblue", 135, 206, 235},
    {"slateblue", 106, 90, 205},
    {"slategray", 112, 128, 144},
    {"slategrey", 112, 128, 144},
    {"snow", 255, 250, 250},
    {"springgreen", 0, 255, 127},
    {"steelblue", 70, 130, 180},
    {"tan", 210, 180, 140},
    {"teal", 0, 128, 128},
    {"thistle", 216, 191, 216},
    {"tomato", 255, 99, 71},
    {"turquoise", 64, 224, 208},
    {"violet", 238, 130, 238},
    {"wheat", 245, 222, 179},
    {"white", 255, 255, 255},
    {"whitesmoke", 245, 245, 245},
    {"yellow", 255, 255, 0},
    {"yellowgreen", 154, 205, 50},
}};

double quantize_alpha(double alpha) {
  alpha = std::clamp(alpha, 0.0, 1.0);
  return std::round(alpha * 255.0) / 255.0;
}

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

[[noreturn]] void unknown(std::string_view value) {
  throw UnknownColor("unrecognized color '" + std::string(value) + "'");
}

Rgba parse_hex(std::string_view digits, std::string_view original) {
  std::vector<int> nibbles;
  for (char c : digits) {
    const int d = hex_digit(c);
    if (d < 0) unknown(original);
    nibbles.push_back(d);
  }
  Rgba out;
  switch (nibbles.size()) {
    case 3:
    case 4:
      out.r = static_cast<std::uint8_t>(nibbles[0] * 17);
      out.g = static_cast<std::uint8_t>(nibbles[1] * 17);
      out.b = static_cast<std::uint8_t>(nibbles[2] * 17);
      if (nibbles.size() == 4) out.alpha = quantize_alpha(nibbles[3] * 17 / 255.0);
      return out;
    case 6:
    case 8:
      out.r = static_cast<std::uint8_t>(nibbles[0] * 16 + nibbles[1]);
      out.g = static_cast<std::uint8_t>(nibbles[2] * 16 + nibbles[3]);
      out.b = static_cast<std::uint8_t>(nibbles[4] * 16 + nibbles[5]);
      if (nibbles.size() == 8) out.alpha = quantize_alpha((nibbles[6] * 16 + nibbles[7]) / 255.0);
      return out;
    default:
      unknown(original);
  }
}

// One functional-notation argument: a number, optionally a percentage.
struct Arg {
  double value;
  bool percent;
};

std::vector<Arg> split_args(std::string_view body, std::string_view original) {
  // Accepts both "1, 2, 3, 0.5" and "1 2 3 / 0.5".
  std::vector<Arg> args;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (is_space(body[i]) || body[i] == ',' || body[i] == '/')) ++i;
    if (i >= body.size()) break;
    std::size_t j = i;
    while (j < body.size() && !is_space(body[j]) && body[j] != ',' && body[j] != '/') ++j;
    std::string_view token = body.substr(i, j - i);
    bool percent = false;
    if (!token.empty() && token.back() == '%') {
      percent = true;
      token.remove_suffix(1);
    } else if (token.size() > 3 && token.substr(token.size() - 3) == "deg") {
      token.remove_suffix(3);
    }
    auto parsed = parse_double(token);
    if (!parsed) unknown(original);
    args.push_back({*parsed, percent});
    i = j;
  }
  return args;
}

double hue_to_rgb(double p, double q, double t) {
  if (t < 0) t += 1;
  if (t > 1) t -= 1;
  if (t < 1.0 / 6) return p + (q - p) * 6 * t;
  if (t < 1.0 / 2) return q;
  if (t < 2.0 / 3) return p + (q - p) * (2.0 / 3 - t) * 6;
  return p;
}

}  // namespace

Rgba parse_color(std::string_view value) {
  const std::string lowered = to_lower(trim(value));
  std::string_view v = lowered;
  if (v.empty()) unknown(value);
  if (v == "none" || v == "transparent") return Rgba{0, 0, 0, 0.0};
  if (v.front() == '#') return parse_hex(v.substr(1), value);

  const auto open = v.find('(');
  if (open != std::string_view::npos) {
    if (v.back() != ')') unknown(value);
    const std::string_view fn = trim(v.substr(0, open));
    const auto args = split_args(v.substr(open + 1, v.size() - open - 2), value);
    if (args.size() != 3 && args.size() != 4) unknown(value);
    Rgba out;
    if (args.size() == 4) {
      out.alpha = quantize_alpha(args[3].percent ? args[3].value / 100.0 : args[3].value);
    }
    if (fn == "rgb" || fn == "rgba") {
      auto channel = [](const Arg& a) {
        return clamp_channel(a.percent ? a.value * 255.0 / 100.0 : a.value);
      };
      out.r = channel(args[0]);
      out.g = channel(args[1]);
      out.b = channel(args[2]);
      return out;
    }
    if (fn == "hsl" || fn == "hsla") {
      double h = std::fmod(args[0].value, 360.0);
      if (h < 0) h += 360.0;
      h /= 360.0;
      const double s = std::clamp(args[1].value / 100.0, 0.0, 1.0);
      const double l = std::clamp(args[2].value / 100.0, 0.0, 1.0);
      const double q = l < 0.5 ? l * (1 + s) : l + s - l * s;
      const double p = 2 * l - q;
      out.r = clamp_channel(255.0 * hue_to_rgb(p, q, h + 1.0 / 3));
      out.g = clamp_channel(255.0 * hue_to_rgb(p, q, h));
      out.b = clamp_channel(255.0 * hue_to_rgb(p, q, h - 1.0 / 3));
      return out;
    }
    unknown(value);
  }

  const auto it = std::lower_bound(kNamedColors.begin(), kNamedColors.end(), v,
                                   [](const NamedColor& c, std::string_view n) { return c.name < n; });
  if (it == kNamedColors.end() || it->name != v) unknown(value);
  return Rgba{it->r, it->g, it->b, 1.0};
}

std::string to_string(const Rgba& color) {
  const std::string rgb = std::to_string(color.r) + ", " + std::to_string(color.g) + ", " +
                          std::to_string(color.b);
  if (color.alpha >= 1.0) return "rgb(" + rgb + ")";
  return "rgba(" + rgb + ", " + format_number(color.alpha, 3) + ")";
}

bool operator<(const Rgba& lhs, const Rgba& rhs) {
  return std::tie(lhs.r, lhs.g, lhs.b, lhs.alpha) < std::tie(rhs.r, rhs.g, rhs.b, rhs.alpha);
}

}  // namespace visgrade::dom
