#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace focalad {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  bool operator==(const Vec2& o) const = default;
};

constexpr double kPi = 3.14159265358979323846;

// Normalizes an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

// Axis-aligned dimensions (length along heading, width across), center pose.
struct OrientedBox {
  Vec2 center;
  double length = 0.0;
  double width = 0.0;
  double heading = 0.0;

  Vec2 axis_long() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 axis_lat() const { return {-std::sin(heading), std::cos(heading)}; }

  std::vector<Vec2> corners() const {
    const Vec2 u = axis_long() * (0.5 * length);
    const Vec2 v = axis_lat() * (0.5 * width);
    return {center + u + v, center + u - v, center - u - v, center - u + v};
  }

  // Point containment in the box frame. Boundary counts as inside.
  bool contains(const Vec2& p) const {
    const Vec2 d = p - center;
    const double lx = d.dot(axis_long());
    const double ly = d.dot(axis_lat());
    return std::abs(lx) <= 0.5 * length && std::abs(ly) <= 0.5 * width;
  }
};

// Signed separation margin between two oriented boxes under the separating
// axis test. Positive means overlap (minimum penetration over the four
// candidate axes), negative means a separating axis exists with that gap.
inline double sat_overlap_margin(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 axes[4] = {a.axis_long(), a.axis_lat(), b.axis_long(), b.axis_lat()};
  const Vec2 d = b.center - a.center;
  double margin = std::numeric_limits<double>::infinity();
  for (const Vec2& ax : axes) {
    const double ra = 0.5 * a.length * std::abs(ax.dot(a.axis_long())) +
                      0.5 * a.width * std::abs(ax.dot(a.axis_lat()));
    const double rb = 0.5 * b.length * std::abs(ax.dot(b.axis_long())) +
                      0.5 * b.width * std::abs(ax.dot(b.axis_lat()));
    const double sep = ra + rb - std::abs(d.dot(ax));
    margin = std::min(margin, sep);
  }
  return margin;
}

// Strict overlap: touching boxes (zero margin) do not collide.
inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  return sat_overlap_margin(a, b) > 0.0;
}

}  // namespace focalad
