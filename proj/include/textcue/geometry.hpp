#pragma once

#include <algorithm>

namespace textcue {

/// Axis-aligned box in original-image pixels, half-open in spirit:
/// [x0, x1) x [y0, y1). Valid boxes have x0 < x1 and y0 < y1.
struct BoxPx {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool valid() const { return x0 < x1 && y0 < y1; }

  bool contains(const BoxPx& o) const {
    return x0 <= o.x0 && y0 <= o.y0 && o.x1 <= x1 && o.y1 <= y1;
  }

  bool operator==(const BoxPx&) const = default;
};

inline BoxPx clip_box(const BoxPx& b, double width, double height) {
  return {std::clamp(b.x0, 0.0, width), std::clamp(b.y0, 0.0, height),
          std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height)};
}

inline double intersection_area(const BoxPx& a, const BoxPx& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace textcue
