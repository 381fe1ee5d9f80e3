#ifndef SVMPLAN_GEODATA_POLYGON_HPP
#define SVMPLAN_GEODATA_POLYGON_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "svmplan/geodata/local_frame.hpp"

namespace svmplan::geodata {

struct Box {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool empty() const { return min_x > max_x || min_y > max_y; }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }

  void expand(Vec2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  void expand(const Box& o) {
    min_x = std::min(min_x, o.min_x);
    min_y = std::min(min_y, o.min_y);
    max_x = std::max(max_x, o.max_x);
    max_y = std::max(max_y, o.max_y);
  }
  bool contains(Vec2 p, double tol = 0.0) const {
    return p.x >= min_x - tol && p.x <= max_x + tol && p.y >= min_y - tol && p.y <= max_y + tol;
  }
  bool overlaps(const Box& o) const {
    return !(o.min_x > max_x || o.max_x < min_x || o.min_y > max_y || o.max_y < min_y);
  }

  static Box inverted() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, -inf, -inf};
  }
  template <class Range>
  static Box of(const Range& pts) {
    Box b = inverted();
    for (const auto& p : pts) b.expand(Vec2{p.x, p.y});
    return b;
  }
};

inline double signed_area(std::span<const Vec2> ring) {
  double s = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) s += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * s;
}

/// Even-odd rule; points exactly on an edge may land on either side.
inline bool point_in_polygon(std::span<const Vec2> ring, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2 a = ring[i], b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b, Vec2* foot = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = a + t * ab;
  if (foot) *foot = q;
  return norm(p - q);
}

namespace detail {
inline int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}
inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
} // namespace detail

inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// True when no two non-adjacent edges of the closed ring touch.
inline bool is_simple_polygon(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = ring[i], a2 = ring[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue; // adjacent edges share a vertex
      if (segments_intersect(a1, a2, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// Parameters t in [0,1] at which segment a->b meets the edges of `ring`.
inline std::vector<double> segment_ring_crossings(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  std::vector<double> ts;
  const Vec2 r = b - a;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    const Vec2 q = ring[i];
    const Vec2 s = ring[(i + 1) % n] - q;
    const double denom = cross(r, s);
    const Vec2 qa = q - a;
    if (std::abs(denom) < 1e-15 * (norm(r) * norm(s) + 1e-300)) {
      // parallel; collinear overlap contributes its endpoints
      if (std::abs(cross(qa, r)) > 1e-9 * norm(r)) continue;
      const double rr = dot(r, r);
      for (double t : {dot(qa, r) / rr, dot(qa + s, r) / rr})
        if (t >= 0.0 && t <= 1.0) ts.push_back(t);
      continue;
    }
    const double t = cross(qa, s) / denom;
    const double u = cross(qa, r) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) ts.push_back(t);
  }
  return ts;
}

} // namespace svmplan::geodata

#endif // SVMPLAN_GEODATA_POLYGON_HPP
