#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace visgrade::dom {

/// Canonical RGBA color. Alpha is stored quantized to 1/255 steps so that
/// "#ff000080" and "rgba(255,0,0,0.5)" compare equal, the same way a
/// browser's computed style serializes them.
struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  double alpha = 1.0;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Parses hex (#rgb, #rgba, #rrggbb, #rrggbbaa), rgb()/rgba(), hsl()/hsla()
/// and CSS named colors. "none" and "transparent" map to alpha 0.
/// Throws UnknownColor.
Rgba parse_color(std::string_view value);

/// "rgb(r, g, b)" for opaque colors, "rgba(r, g, b, a)" otherwise.
std::string to_string(const Rgba& color);

bool operator<(const Rgba& lhs, const Rgba& rhs);

}  // namespace visgrade::dom
