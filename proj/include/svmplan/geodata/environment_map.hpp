#ifndef SVMPLAN_GEODATA_ENVIRONMENT_MAP_HPP
#define SVMPLAN_GEODATA_ENVIRONMENT_MAP_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svmplan/geodata/local_frame.hpp"
#include "svmplan/geodata/polygon.hpp"

namespace svmplan::geodata {

enum class TerrainClass { Flat = 1, Hilly = 2 };

inline std::string_view to_string(TerrainClass c) { return c == TerrainClass::Flat ? "flat" : "hilly"; }

inline TerrainClass terrain_class_from_string(std::string_view s) {
  if (s == "flat" || s == "1" || s == "Flat") return TerrainClass::Flat;
  if (s == "hilly" || s == "2" || s == "Hilly") return TerrainClass::Hilly;
  throw InvalidArgument("unknown terrain class '" + std::string(s) + "' (expected flat|hilly)");
}

/// 2.5D building: footprint extruded from base_elevation up to
/// base_elevation + roof_height. Footprint is stored counter-clockwise.
struct Building {
  std::string id;
  std::vector<Vec2> footprint;
  double roof_height = 0.0;
  double base_elevation = 0.0;
  Box box = Box::inverted();

  double roof_elevation() const { return base_elevation + roof_height; }
};

struct ContourLine {
  std::vector<Vec2> polyline;
  double elevation = 0.0;
};

struct Road {
  std::string name;
  std::vector<Vec2> centerline;
};

namespace detail {

/// Uniform grid over contour segments for nearest-contour queries.
class ContourIndex {
public:
  ContourIndex() = default;

  explicit ContourIndex(const std::vector<ContourLine>& contours) {
    Box box = Box::inverted();
    for (std::size_t c = 0; c < contours.size(); ++c) {
      const auto& pl = contours[c].polyline;
      for (std::size_t k = 0; k + 1 < pl.size(); ++k) segs_.push_back({pl[k], pl[k + 1], c});
      box.expand(Box::of(pl));
    }
    if (segs_.empty()) return;
    origin_ = {box.min_x, box.min_y};
    const double extent = std::max({box.width(), box.height(), 1.0});
    const double target = std::sqrt(static_cast<double>(segs_.size()));
    cell_ = std::max(extent / std::max(1.0, target), 1.0);
    nx_ = static_cast<int>(box.width() / cell_) + 1;
    ny_ = static_cast<int>(box.height() / cell_) + 1;
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      const Box sb = Box::of(std::initializer_list<Vec2>{segs_[s].a, segs_[s].b});
      const int i0 = cell_x(sb.min_x), i1 = cell_x(sb.max_x);
      const int j0 = cell_y(sb.min_y), j1 = cell_y(sb.max_y);
      for (int j = std::max(j0, 0); j <= std::min(j1, ny_ - 1); ++j)
        for (int i = std::max(i0, 0); i <= std::min(i1, nx_ - 1); ++i)
          cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(s);
    }
  }

  /// Calls visit(segment contour, distance) over rings of cells around p
  /// until stop(lower_bound) returns true or the grid is exhausted.
  template <class Visit, class Stop>
  void search(Vec2 p, Visit&& visit, Stop&& stop) const {
    if (segs_.empty()) return;
    const int qi = cell_x(p.x), qj = cell_y(p.y);
    const int max_r = std::max({std::abs(qi), std::abs(qi - nx_ + 1), std::abs(qj), std::abs(qj - ny_ + 1)});
    std::vector<char> seen(segs_.size(), 0);
    for (int r = 0; r <= max_r; ++r) {
      for (int j = qj - r; j <= qj + r; ++j) {
        if (j < 0 || j >= ny_) continue;
        const bool edge_row = (j == qj - r || j == qj + r);
        for (int i = qi - r; i <= qi + r; i += (edge_row ? 1 : 2 * r)) {
          if (i >= 0 && i < nx_) {
            for (std::size_t s : cells_[static_cast<std::size_t>(j) * nx_ + i]) {
              if (seen[s]) continue;
              seen[s] = 1;
              visit(segs_[s].contour, point_segment_distance(p, segs_[s].a, segs_[s].b));
            }
          }
          if (r == 0) break;
        }
      }
      if (stop(r * cell_)) return;
    }
  }

private:
  struct Seg {
    Vec2 a, b;
    std::size_t contour;
  };
  int cell_x(double x) const { return static_cast<int>(std::floor((x - origin_.x) / cell_)); }
  int cell_y(double y) const { return static_cast<int>(std::floor((y - origin_.y) / cell_)); }

  std::vector<Seg> segs_;
  std::vector<std::vector<std::size_t>> cells_;
  Vec2 origin_;
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
};

} // namespace detail

/// Immutable geometric world: buildings, contours, roads and terrain class,
/// all in the local metric frame anchored at `origin`.
class EnvironmentMap {
public:
  EnvironmentMap(GeoPoint origin, TerrainClass terrain, double ground_elevation, std::vector<Building> buildings,
                 std::vector<ContourLine> contours, std::vector<Road> roads,
                 std::optional<Box> declared_bounds = std::nullopt)
      : frame_(origin), terrain_(terrain), ground_elevation_(ground_elevation), buildings_(std::move(buildings)),
        contours_(std::move(contours)), roads_(std::move(roads)) {
    bounds_ = Box::inverted();
    for (auto& b : buildings_) {
      b.box = Box::of(b.footprint);
      bounds_.expand(b.box);
    }
    for (const auto& c : contours_) bounds_.expand(Box::of(c.polyline));
    for (const auto& r : roads_) bounds_.expand(Box::of(r.centerline));
    if (declared_bounds) bounds_.expand(*declared_bounds);
    if (bounds_.empty()) bounds_ = Box{0, 0, 0, 0};
    contour_index_ = std::make_shared<const detail::ContourIndex>(contours_);
  }

  const LocalFrame& frame() const { return frame_; }
  const GeoPoint& origin() const { return frame_.origin(); }
  TerrainClass terrain_class() const { return terrain_; }
  double ground_elevation() const { return ground_elevation_; }
  const std::vector<Building>& buildings() const { return buildings_; }
  const std::vector<ContourLine>& contours() const { return contours_; }
  const std::vector<Road>& roads() const { return roads_; }
  const Box& bounds() const { return bounds_; }

  LocalPoint to_local(const GeoPoint& p) const { return frame_.to_local(p); }
  GeoPoint to_geo(const LocalPoint& p, bool with_altitude = true) const { return frame_.to_geo(p, with_altitude); }

  const detail::ContourIndex& contour_index() const { return *contour_index_; }

private:
  LocalFrame frame_;
  TerrainClass terrain_;
  double ground_elevation_;
  std::vector<Building> buildings_;
  std::vector<ContourLine> contours_;
  std::vector<Road> roads_;
  Box bounds_;
  std::shared_ptr<const detail::ContourIndex> contour_index_;
};

/// Terrain elevation at a horizontal position. Flat maps return the declared
/// ground elevation. Hilly maps interpolate linearly, by inverse distance,
/// between the nearest contour and the nearest contour of a different
/// elevation.
inline double elevation_at(const EnvironmentMap& map, Vec2 p) {
  if (map.terrain_class() == TerrainClass::Flat) return map.ground_elevation();
  const auto& contours = map.contours();
  if (contours.empty()) throw NoTerrainData("elevation_at: hilly map has no contour lines");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(contours.size(), inf); // nearest distance per contour
  double d1 = inf, e1 = 0.0, d2 = inf, e2 = 0.0;
  auto reduce = [&] {
    d1 = d2 = inf;
    for (std::size_t c = 0; c < contours.size(); ++c)
      if (best[c] < d1) {
        d1 = best[c];
        e1 = contours[c].elevation;
      }
    for (std::size_t c = 0; c < contours.size(); ++c)
      if (contours[c].elevation != e1 && best[c] < d2) {
        d2 = best[c];
        e2 = contours[c].elevation;
      }
  };
  map.contour_index().search(
      p, [&](std::size_t c, double d) { best[c] = std::min(best[c], d); },
      [&](double lower_bound) {
        reduce();
        return d2 <= lower_bound;
      });
  reduce();

  if (d1 <= 1e-12 || d2 == inf) return e1;
  return (e1 * d2 + e2 * d1) / (d1 + d2);
}

inline double elevation_at(const EnvironmentMap& map, const LocalPoint& p) { return elevation_at(map, xy(p)); }

struct RoadProjection {
  GeoPoint point;
  bool projected = false;
  double distance = 0.0; // horizontal distance from input to nearest centerline
  std::size_t road = 0;
};

/// Snaps a GPS fix to the nearest road centerline when it lies within
/// `gate` meters; otherwise returns it unchanged with `projected == false`.
inline RoadProjection project_to_road(const EnvironmentMap& map, const GeoPoint& p, double gate = 30.0) {
  if (map.roads().empty()) throw InvalidArgument("project_to_road: map has no roads");
  const LocalPoint lp = map.to_local(p);
  const Vec2 q = xy(lp);
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_foot = q;
  std::size_t best_road = 0;
  for (std::size_t r = 0; r < map.roads().size(); ++r) {
    const auto& cl = map.roads()[r].centerline;
    for (std::size_t k = 0; k + 1 < cl.size(); ++k) {
      Vec2 foot;
      const double d = point_segment_distance(q, cl[k], cl[k + 1], &foot);
      if (d < best) {
        best = d;
        best_foot = foot;
        best_road = r;
      }
    }
  }
  if (best > gate) return {p, false, best, best_road};
  if (best == 0.0) return {p, true, 0.0, best_road};
  GeoPoint out = map.to_geo({best_foot.x, best_foot.y, lp.z}, p.altitude.has_value());
  return {out, true, best, best_road};
}

/// Portion of a TX-RX segment that passes through one building below its roof.
struct BuildingCut {
  std::size_t building = 0;
  double chord = 0.0;   // 3D length of the below-roof sub-intervals (b_l)
  double height = 0.0;  // roof height above terrain (h_l)
  double t_enter = 0.0; // segment parameter of the first entry
  double t_exit = 0.0;  // segment parameter of the last exit
  double t_inside = 0.0; // total parameter length inside (chord / segment length)
};

inline bool on_boundary(std::span<const Vec2> ring, Vec2 p, double tol = 1e-9) {
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
    if (point_segment_distance(p, ring[j], ring[i]) <= tol) return true;
  return false;
}

/// Intervals of [0,1] where the segment a->b lies strictly inside `ring` in
/// 2D; runs along an edge are not inside.
inline std::vector<std::pair<double, double>> inside_intervals(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  auto ts = segment_ring_crossings(a, b, ring);
  ts.push_back(0.0);
  ts.push_back(1.0);
  std::sort(ts.begin(), ts.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double t0 = ts[k], t1 = ts[k + 1];
    if (t1 - t0 <= 1e-12) continue;
    const Vec2 mid = a + (0.5 * (t0 + t1)) * (b - a);
    if (!point_in_polygon(ring, mid) || on_boundary(ring, mid)) continue;
    if (!out.empty() && std::abs(out.back().second - t0) <= 1e-12)
      out.back().second = t1;
    else
      out.emplace_back(t0, t1);
  }
  return out;
}

/// Buildings that obstruct the straight segment tx->rx, ordered by entry
/// distance from tx. A building counts only where the segment is inside its
/// footprint and below its roof elevation.
inline std::vector<BuildingCut> segment_building_intersections(const EnvironmentMap& map, const LocalPoint& tx,
                                                               const LocalPoint& rx) {
  std::vector<BuildingCut> cuts;
  const Vec2 a = xy(tx), b = xy(rx);
  const double length = distance3d(tx, rx);
  if (length == 0.0) return cuts;
  const Box seg_box = Box::of(std::initializer_list<Vec2>{a, b});
  const double dz = rx.z - tx.z;

  for (std::size_t i = 0; i < map.buildings().size(); ++i) {
    const Building& bld = map.buildings()[i];
    if (!seg_box.overlaps(bld.box)) continue;
    const double roof = bld.roof_elevation();
    // {t : tx.z + t*dz < roof}
    double lo = 0.0, hi = 1.0;
    if (dz == 0.0) {
      if (tx.z >= roof) continue;
    } else {
      const double t_roof = (roof - tx.z) / dz;
      if (dz > 0.0)
        hi = std::min(hi, t_roof);
      else
        lo = std::max(lo, t_roof);
    }
    if (hi <= lo) continue;

    BuildingCut cut{i, 0.0, bld.roof_height, 2.0, -1.0, 0.0};
    for (auto [t0, t1] : inside_intervals(a, b, bld.footprint)) {
      const double s0 = std::max(t0, lo), s1 = std::min(t1, hi);
      if (s1 - s0 <= 1e-12) continue;
      cut.t_inside += s1 - s0;
      cut.t_enter = std::min(cut.t_enter, s0);
      cut.t_exit = std::max(cut.t_exit, s1);
    }
    if (cut.t_inside <= 0.0) continue;
    cut.chord = cut.t_inside * length;
    cuts.push_back(cut);
  }
  std::sort(cuts.begin(), cuts.end(), [](const BuildingCut& x, const BuildingCut& y) {
    return x.t_enter != y.t_enter ? x.t_enter < y.t_enter : x.building < y.building;
  });
  return cuts;
}

struct TerrainRun {
  double t_begin = 0.0;
  double t_end = 0.0;
  double length = 0.0; // 3D length (a_l)
};

/// Maximal runs of the segment tx->rx that lie below the terrain. The
/// segment is sampled every `step` meters (horizontal); each sign change is
/// refined by bisection so run ends are exact to well below a millimeter.
inline std::vector<TerrainRun> segment_terrain_intersections(const EnvironmentMap& map, const LocalPoint& tx,
                                                             const LocalPoint& rx, double step = 1.0) {
  if (map.terrain_class() == TerrainClass::Hilly && map.contours().empty())
    throw NoTerrainData("segment_terrain_intersections: hilly map has no contour lines");
  std::vector<TerrainRun> runs;
  const double length = distance3d(tx, rx);
  if (length == 0.0) return runs;
  const Vec2 a = xy(tx), b = xy(rx);
  const double horizontal = norm(b - a);
  auto below = [&](double t) {
    const double z = tx.z + t * (rx.z - tx.z);
    return z < elevation_at(map, a + t * (b - a));
  };
  auto refine = [&](double t_above, double t_below) {
    for (int k = 0; k < 60 && std::abs(t_below - t_above) * horizontal > 1e-7; ++k) {
      const double tm = 0.5 * (t_above + t_below);
      (below(tm) ? t_below : t_above) = tm;
    }
    return 0.5 * (t_above + t_below);
  };

  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizontal / step)));
  bool prev = below(0.0);
  double run_start = 0.0;
  double t_prev = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    const bool cur = below(t);
    if (cur && !prev) run_start = refine(t_prev, t);
    if (!cur && prev) {
      const double end = refine(t, t_prev);
      runs.push_back({run_start, end, (end - run_start) * length});
    }
    prev = cur;
    t_prev = t;
  }
  if (prev) runs.push_back({run_start, 1.0, (1.0 - run_start) * length});
  return runs;
}

} // namespace svmplan::geodata

#endif // SVMPLAN_GEODATA_ENVIRONMENT_MAP_HPP
