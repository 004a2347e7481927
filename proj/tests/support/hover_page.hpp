#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mock_webdriver.hpp"

namespace visgrade::synth {

// A scatterplot whose circles turn orange and grow on hover, with a tooltip
// shown while hovered. Nodes can be dragged: pointer down on a circle, then
// moves carry it along until pointer up.
struct HoverPage {
  struct Node {
    double cx, cy, r = 3;
    std::string fill = "rgb(31, 119, 180)";
  };
  std::vector<Node> nodes{{50, 60}, {120, 90}, {200, 40}};
  int hovered = -1;
  int dragging = -1;
  double last_x = 0, last_y = 0;
  bool tooltip_exists = true;

  std::string markup() const {
    std::string s = R"~(<!DOCTYPE html><html><head><title>fixture</title></head><body><svg width="400" height="300"><g id="marks">)~";
    for (const auto& n : nodes) {
      s += fmt::format(R"~(<circle class="dot" cx="{}" cy="{}" r="{}" fill="{}" data-visgrade-style="fill:{};opacity:1"/>)~",
                       n.cx, n.cy, n.r, n.fill, n.fill);
    }
    s += "</g></svg>";
    if (tooltip_exists) {
      s += fmt::format(R"~(<div id="tooltip" data-visgrade-style="display:{}">{}</div>)~",
                       hovered >= 0 ? "block" : "none", hovered >= 0 ? fmt::format("node {}", hovered) : "");
    }
    return s + "</body></html>";
  }

  void reload() {
    nodes = HoverPage{}.nodes;
    hovered = dragging = -1;
  }

  int hit(double x, double y) const {
    for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
      if (std::hypot(x - nodes[i].cx, y - nodes[i].cy) <= nodes[i].r + 0.5) return i;
    }
    return -1;
  }

  void pointer(const std::string& type, double x, double y) {
    if (type == "down") {
      dragging = hit(x, y);
    } else if (type == "up") {
      dragging = -1;
    } else if (dragging >= 0) {
      nodes[dragging].cx += x - last_x;
      nodes[dragging].cy += y - last_y;
    } else {
      const int h = hit(x, y);
      if (h != hovered) {
        if (hovered >= 0) nodes[hovered].fill = "rgb(31, 119, 180)", nodes[hovered].r = 3;
        if (h >= 0) nodes[h].fill = "rgb(255, 165, 0)", nodes[h].r = 6;
        hovered = h;
      }
    }
    last_x = x;
    last_y = y;
  }
};

inline MockPage mock_page(HoverPage& page) {
  MockPage m;
  m.markup = [&page] { return page.markup(); };
  m.navigate = [&page](MockPage&, const std::string&) { page.reload(); };
  m.pointer = [&page](const std::string& t, double x, double y) { page.pointer(t, x, y); };
  return m;
}

}  // namespace visgrade::synth
