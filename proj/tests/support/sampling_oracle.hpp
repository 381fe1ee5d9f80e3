#pragma once

// Brute-force geometry references: walk the 3D segment in fixed steps and
// classify each step's midpoint. Polygon containment and terrain elevation
// are re-derived here without the library's spatial index.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "svmplan/geodata/environment_map.hpp"

namespace oracle {

using svmplan::geodata::EnvironmentMap;
using svmplan::geodata::LocalPoint;
using svmplan::geodata::Vec2;

/// Winding-number containment.
inline bool inside(const std::vector<Vec2>& ring, Vec2 p) {
  int wn = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % ring.size()];
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++wn;
    } else if (b.y <= p.y && side < 0) {
      --wn;
    }
  }
  return wn != 0;
}

inline double dist_to_polyline(const std::vector<Vec2>& pl, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    const Vec2 a = pl[i], b = pl[i + 1];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy)));
  }
  return best;
}

/// Nearest contour, nearest contour of a different elevation, and the
/// inverse-distance blend of the two. Scans every contour.
inline double elevation(const EnvironmentMap& map, Vec2 p) {
  const auto& cs = map.contours();
  if (map.terrain_class() == svmplan::geodata::TerrainClass::Flat || cs.empty()) return map.ground_elevation();
  std::vector<double> d(cs.size());
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    d[i] = dist_to_polyline(cs[i].polyline, p);
    if (d[i] < d[n1]) n1 = i;
  }
  const double e1 = cs[n1].elevation;
  std::size_t n2 = cs.size();
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (cs[i].elevation != e1 && (n2 == cs.size() || d[i] < d[n2])) n2 = i;
  if (n2 == cs.size() || d[n1] == 0.0) return e1;
  const double e2 = cs[n2].elevation;
  return (e1 * d[n2] + e2 * d[n1]) / (d[n1] + d[n2]);
}

struct SampledFractions {
  double ptb = 0.0;
  double ptg = 0.0;
};

/// Fractions of tx->rx inside a building below its roof, and below terrain.
inline SampledFractions sample_segment(const EnvironmentMap& map, const LocalPoint& tx, const LocalPoint& rx,
                                       double step = 0.01, bool with_terrain = true) {
  const double len = std::sqrt((rx.x - tx.x) * (rx.x - tx.x) + (rx.y - tx.y) * (rx.y - tx.y) +
                               (rx.z - tx.z) * (rx.z - tx.z));
  SampledFractions out;
  if (len == 0.0) return out;
  const auto n = static_cast<std::size_t>(std::ceil(len / step));
  std::size_t in_bld = 0, in_ground = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const Vec2 q{tx.x + t * (rx.x - tx.x), tx.y + t * (rx.y - tx.y)};
    const double z = tx.z + t * (rx.z - tx.z);
    for (const auto& b : map.buildings()) {
      if (z < b.base_elevation + b.roof_height && inside(b.footprint, q)) {
        ++in_bld;
        break;
      }
    }
    if (with_terrain && z < elevation(map, q)) ++in_ground;
  }
  out.ptb = static_cast<double>(in_bld) / static_cast<double>(n);
  out.ptg = static_cast<double>(in_ground) / static_cast<double>(n);
  return out;
}

} // namespace oracle
