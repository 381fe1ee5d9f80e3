#ifndef SVMPLAN_FEATURES_HPP
#define SVMPLAN_FEATURES_HPP

#include <array>
#include <cmath>
#include <string_view>

#include "svmplan/geodata/environment_map.hpp"
#include "svmplan/geodata/geodesy.hpp"

namespace svmplan::features {

using geodata::EnvironmentMap;
using geodata::GeoPoint;
using geodata::LocalPoint;
using geodata::TerrainClass;

inline constexpr std::size_t kFeatureCount = 7;

/// Per-location input to both SVMs. Component order is fixed per terrain
/// class (see feature_names) so serialized models stay portable.
using FeatureVector = std::array<double, kFeatureCount>;

/// Flat:  d, phi, h_max, h_av, PTB, d_tx, d_rx
/// Hilly: d, phi, h_max, h_av, PTB, D, PTG
inline constexpr std::array<std::string_view, kFeatureCount> feature_names(TerrainClass c) {
  if (c == TerrainClass::Flat) return {"d", "phi", "h_max", "h_av", "ptb", "d_tx", "d_rx"};
  return {"d", "phi", "h_max", "h_av", "ptb", "D", "ptg"};
}

struct Antenna {
  GeoPoint position;
  double mast_height = 0.0; // meters above local ground
};

/// Absolute antenna elevation: interpolated terrain plus mast height.
inline double antenna_elevation(const EnvironmentMap& map, const Antenna& a) {
  return geodata::elevation_at(map, geodata::xy(map.to_local(a.position))) + a.mast_height;
}

/// D = h_c - h: TX elevation minus RX elevation.
inline double differential_height(const Antenna& tx, const Antenna& rx, const EnvironmentMap& map) {
  return antenna_elevation(map, tx) - antenna_elevation(map, rx);
}

/// Geometry of one TX-RX link, computed once and shared by all features.
struct LinkGeometry {
  LocalPoint tx;   // local frame, z = absolute antenna elevation
  LocalPoint rx;
  double D = 0.0;          // differential height
  double d_wgs84 = 0.0;    // horizontal geodesic distance
  double d = 0.0;          // sqrt(D^2 + d_wgs84^2)
  bool approximate = false; // geodesic fell back to the sphere
};

inline LinkGeometry link_geometry(const EnvironmentMap& map, const Antenna& tx, const Antenna& rx) {
  LinkGeometry g;
  g.tx = map.to_local(tx.position);
  g.rx = map.to_local(rx.position);
  g.tx.z = geodata::elevation_at(map, geodata::xy(g.tx)) + tx.mast_height;
  g.rx.z = geodata::elevation_at(map, geodata::xy(g.rx)) + rx.mast_height;
  g.D = g.tx.z - g.rx.z;
  const auto gd = geodata::geodesic_distance(tx.position, rx.position);
  g.d_wgs84 = gd.meters;
  g.approximate = gd.approximate;
  g.d = std::hypot(g.D, g.d_wgs84);
  return g;
}

inline double tx_rx_distance(const Antenna& tx, const Antenna& rx, const EnvironmentMap& map) {
  return link_geometry(map, tx, rx).d;
}

/// Elevation angle of RX seen from TX, radians; positive when RX is above TX.
inline double angular_deviation(double D, double d_wgs84) { return std::atan2(-D, d_wgs84); }

inline double angular_deviation(const Antenna& tx, const Antenna& rx, const EnvironmentMap& map) {
  const auto g = link_geometry(map, tx, rx);
  return angular_deviation(g.D, g.d_wgs84);
}

struct BlockingProfile {
  double h_max = 0.0;
  double h_av = 0.0;
  double ptb = 0.0;
  double d_tx = 0.0;
  double d_rx = 0.0;
  std::size_t k = 0; // number of blocking buildings
};

/// Building-obstruction features. Chords and free-space runs are measured
/// along the 3D segment, scaled to the link length d. With no blocking
/// building, d_tx = d_rx = d.
inline BlockingProfile blocking_profile(const EnvironmentMap& map, const LinkGeometry& g) {
  BlockingProfile bp;
  bp.d_tx = bp.d_rx = g.d;
  if (g.d == 0.0) return bp;
  const auto cuts = geodata::segment_building_intersections(map, g.tx, g.rx);
  if (cuts.empty()) return bp;
  bp.k = cuts.size();
  double sum_h = 0.0, sum_t = 0.0, first_enter = 1.0, last_exit = 0.0;
  for (const auto& c : cuts) {
    bp.h_max = std::max(bp.h_max, c.height);
    sum_h += c.height;
    sum_t += c.t_inside;
    first_enter = std::min(first_enter, c.t_enter);
    last_exit = std::max(last_exit, c.t_exit);
  }
  bp.h_av = sum_h / static_cast<double>(cuts.size());
  bp.ptb = std::min(1.0, sum_t);
  bp.d_tx = first_enter * g.d;
  bp.d_rx = (1.0 - last_exit) * g.d;
  return bp;
}

inline BlockingProfile blocking_profile(const EnvironmentMap& map, const Antenna& tx, const Antenna& rx) {
  return blocking_profile(map, link_geometry(map, tx, rx));
}

/// PTG: fraction of the link below the terrain.
inline double portion_through_ground(const EnvironmentMap& map, const LinkGeometry& g, double step = 1.0) {
  if (map.terrain_class() == TerrainClass::Hilly && map.contours().empty())
    throw NoTerrainData("portion_through_ground: hilly map has no contour lines");
  if (g.d == 0.0) return 0.0;
  double sum_t = 0.0;
  for (const auto& run : geodata::segment_terrain_intersections(map, g.tx, g.rx, step))
    sum_t += run.t_end - run.t_begin;
  return std::min(1.0, sum_t);
}

inline double portion_through_ground(const EnvironmentMap& map, const Antenna& tx, const Antenna& rx,
                                     double step = 1.0) {
  return portion_through_ground(map, link_geometry(map, tx, rx), step);
}

struct FeatureOptions {
  double terrain_step = 1.0; // meters, PTG sampling step
};

inline FeatureVector extract_features(const EnvironmentMap& map, const Antenna& tx, const Antenna& rx,
                                      const FeatureOptions& opt = {}) {
  const auto g = link_geometry(map, tx, rx);
  const auto bp = blocking_profile(map, g);
  FeatureVector v{g.d, angular_deviation(g.D, g.d_wgs84), bp.h_max, bp.h_av, bp.ptb, 0.0, 0.0};
  if (map.terrain_class() == TerrainClass::Flat) {
    v[5] = bp.d_tx;
    v[6] = bp.d_rx;
  } else {
    v[5] = g.D;
    v[6] = portion_through_ground(map, g, opt.terrain_step);
  }
  return v;
}

} // namespace svmplan::features

#endif // SVMPLAN_FEATURES_HPP
