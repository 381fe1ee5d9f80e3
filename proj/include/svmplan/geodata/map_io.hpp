#ifndef SVMPLAN_GEODATA_MAP_IO_HPP
#define SVMPLAN_GEODATA_MAP_IO_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmplan/geodata/environment_map.hpp"

namespace svmplan::geodata {

// Map file layout (UTF-8 JSON, WGS-84 geographic coordinates, [lon, lat]):
//
//   {
//     "origin": {"lat": .., "lon": ..},          optional, default bbox center
//     "ground_elevation": 35.0,                  optional, flat maps, default 0
//     "bounds": [min_lon, min_lat, max_lon, max_lat],   optional
//     "layers": {
//       "buildings": FeatureCollection of (Multi)Polygon,
//                    properties: height (required, > 0), base_elevation
//       "contours":  FeatureCollection of (Multi)LineString,
//                    properties: elevation (required); required for hilly maps
//       "roads":     FeatureCollection of (Multi)LineString, properties: name
//     }
//   }

namespace detail {

using nlohmann::json;

inline std::string feature_id(const json& feature, std::size_t index) {
  auto id_of = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return v.dump();
    return {};
  };
  if (feature.contains("id")) {
    if (auto s = id_of(feature["id"]); !s.empty()) return s;
  }
  if (feature.contains("properties") && feature["properties"].is_object() && feature["properties"].contains("id")) {
    if (auto s = id_of(feature["properties"]["id"]); !s.empty()) return s;
  }
  return "#" + std::to_string(index);
}

inline GeoPoint read_position(const json& pos, const std::string& where) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw ParseError(where + ": position must be [lon, lat]");
  GeoPoint p{pos[1].get<double>(), pos[0].get<double>(), std::nullopt};
  if (!p.valid()) throw SchemaError(where + ": coordinate out of WGS-84 range (is the CRS geographic?)");
  return p;
}

/// Line strings of a (Multi)LineString geometry.
inline std::vector<std::vector<GeoPoint>> read_lines(const json& geom, const std::string& where) {
  std::vector<std::vector<GeoPoint>> out;
  const std::string type = geom.value("type", "");
  auto line = [&](const json& coords) {
    if (!coords.is_array()) throw ParseError(where + ": coordinates must be an array");
    std::vector<GeoPoint> pts;
    for (const auto& c : coords) pts.push_back(read_position(c, where));
    if (pts.size() < 2) throw GeometryError(where + ": line needs at least 2 vertices");
    out.push_back(std::move(pts));
  };
  if (type == "LineString") {
    line(geom.at("coordinates"));
  } else if (type == "MultiLineString") {
    for (const auto& l : geom.at("coordinates")) line(l);
  } else {
    throw SchemaError(where + ": expected LineString geometry, got '" + type + "'");
  }
  return out;
}

/// Outer rings of a (Multi)Polygon geometry, closing vertex removed.
inline std::vector<std::vector<GeoPoint>> read_outer_rings(const json& geom, const std::string& where) {
  std::vector<std::vector<GeoPoint>> out;
  const std::string type = geom.value("type", "");
  auto polygon = [&](const json& rings) {
    if (!rings.is_array() || rings.empty()) throw ParseError(where + ": polygon has no rings");
    std::vector<GeoPoint> pts;
    for (const auto& c : rings[0]) pts.push_back(read_position(c, where));
    if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
    out.push_back(std::move(pts));
  };
  if (type == "Polygon") {
    polygon(geom.at("coordinates"));
  } else if (type == "MultiPolygon") {
    for (const auto& p : geom.at("coordinates")) polygon(p);
  } else {
    throw SchemaError(where + ": expected Polygon geometry, got '" + type + "'");
  }
  return out;
}

inline const json& features_of(const json& layer, const std::string& name) {
  if (!layer.is_object() || !layer.contains("features") || !layer["features"].is_array())
    throw SchemaError("layer '" + name + "' must be a FeatureCollection with a 'features' array");
  return layer["features"];
}

inline std::optional<double> number_property(const json& feature, const char* key) {
  if (!feature.contains("properties") || !feature["properties"].is_object()) return std::nullopt;
  const auto& props = feature["properties"];
  if (!props.contains(key) || !props[key].is_number()) return std::nullopt;
  return props[key].get<double>();
}

inline void check_crs(const json& obj) {
  if (!obj.contains("crs")) return;
  const std::string s = obj["crs"].dump();
  for (const char* ok : {"CRS84", "4326", "WGS84", "WGS 84"})
    if (s.find(ok) != std::string::npos) return;
  throw SchemaError("map CRS must be WGS-84 geographic coordinates, got " + s);
}

} // namespace detail

/// Builds a validated map from the parsed document.
inline EnvironmentMap parse_map(const nlohmann::json& doc, TerrainClass terrain) {
  using detail::json;
  if (!doc.is_object()) throw ParseError("map document must be a JSON object");
  detail::check_crs(doc);
  if (!doc.contains("layers") || !doc["layers"].is_object()) throw SchemaError("map is missing the 'layers' object");
  const json& layers = doc["layers"];
  if (!layers.contains("buildings")) throw SchemaError("map is missing required layer 'buildings'");
  if (terrain == TerrainClass::Hilly && !layers.contains("contours"))
    throw SchemaError("hilly map is missing required layer 'contours'");

  struct RawBuilding {
    std::string id;
    std::vector<GeoPoint> ring;
    double height;
    std::optional<double> base;
  };
  std::vector<RawBuilding> raw_buildings;
  std::vector<std::pair<std::vector<GeoPoint>, double>> raw_contours;
  std::vector<std::pair<std::vector<GeoPoint>, std::string>> raw_roads;

  std::vector<std::string> missing_height;
  const auto& bfeatures = detail::features_of(layers["buildings"], "buildings");
  for (std::size_t i = 0; i < bfeatures.size(); ++i) {
    const auto& f = bfeatures[i];
    const std::string id = detail::feature_id(f, i);
    const auto height = detail::number_property(f, "height");
    if (!height) {
      missing_height.push_back(id);
      continue;
    }
    if (!(*height > 0.0) || !std::isfinite(*height))
      throw GeometryError("building " + id + ": height must be positive");
    if (!f.contains("geometry")) throw SchemaError("building " + id + ": missing geometry");
    const auto rings = detail::read_outer_rings(f["geometry"], "building " + id);
    for (std::size_t r = 0; r < rings.size(); ++r)
      raw_buildings.push_back({rings.size() > 1 ? id + "." + std::to_string(r) : id, rings[r], *height,
                               detail::number_property(f, "base_elevation")});
  }
  if (!missing_height.empty()) {
    std::string list;
    for (const auto& id : missing_height) list += (list.empty() ? "" : ", ") + id;
    throw SchemaError("buildings missing numeric 'height' property: " + list);
  }

  if (layers.contains("contours")) {
    const auto& cf = detail::features_of(layers["contours"], "contours");
    for (std::size_t i = 0; i < cf.size(); ++i) {
      const std::string id = detail::feature_id(cf[i], i);
      const auto elev = detail::number_property(cf[i], "elevation");
      if (!elev || !std::isfinite(*elev)) throw SchemaError("contour " + id + ": missing numeric 'elevation' property");
      if (!cf[i].contains("geometry")) throw SchemaError("contour " + id + ": missing geometry");
      for (auto& line : detail::read_lines(cf[i]["geometry"], "contour " + id))
        raw_contours.emplace_back(std::move(line), *elev);
    }
  }
  if (layers.contains("roads")) {
    const auto& rf = detail::features_of(layers["roads"], "roads");
    for (std::size_t i = 0; i < rf.size(); ++i) {
      const std::string id = detail::feature_id(rf[i], i);
      std::string name = id;
      if (rf[i].contains("properties") && rf[i]["properties"].is_object() &&
          rf[i]["properties"].contains("name") && rf[i]["properties"]["name"].is_string())
        name = rf[i]["properties"]["name"].get<std::string>();
      if (!rf[i].contains("geometry")) throw SchemaError("road " + id + ": missing geometry");
      for (auto& line : detail::read_lines(rf[i]["geometry"], "road " + id)) raw_roads.emplace_back(std::move(line), name);
    }
  }

  // geographic bounding box -> origin
  double min_lat = 90, max_lat = -90, min_lon = 180, max_lon = -180;
  auto grow = [&](const GeoPoint& p) {
    min_lat = std::min(min_lat, p.latitude);
    max_lat = std::max(max_lat, p.latitude);
    min_lon = std::min(min_lon, p.longitude);
    max_lon = std::max(max_lon, p.longitude);
  };
  for (const auto& b : raw_buildings) std::ranges::for_each(b.ring, grow);
  for (const auto& c : raw_contours) std::ranges::for_each(c.first, grow);
  for (const auto& r : raw_roads) std::ranges::for_each(r.first, grow);
  std::optional<std::pair<GeoPoint, GeoPoint>> declared;
  if (doc.contains("bounds")) {
    const auto& b = doc["bounds"];
    if (!b.is_array() || b.size() != 4) throw ParseError("'bounds' must be [min_lon, min_lat, max_lon, max_lat]");
    const GeoPoint lo = detail::read_position(json::array({b[0], b[1]}), "bounds");
    const GeoPoint hi = detail::read_position(json::array({b[2], b[3]}), "bounds");
    grow(lo);
    grow(hi);
    declared = {lo, hi};
  }

  GeoPoint origin;
  if (doc.contains("origin")) {
    const auto& o = doc["origin"];
    if (o.is_object() && o.contains("lat") && o.contains("lon"))
      origin = {o["lat"].get<double>(), o["lon"].get<double>(), std::nullopt};
    else
      origin = detail::read_position(o, "origin");
    if (!origin.valid()) throw SchemaError("origin out of WGS-84 range");
  } else {
    if (min_lat > max_lat) throw SchemaError("map has no geometry and no origin");
    origin = {0.5 * (min_lat + max_lat), 0.5 * (min_lon + max_lon), std::nullopt};
  }

  const double ground = doc.value("ground_elevation", 0.0);
  const LocalFrame frame(origin);
  auto local = [&](const std::vector<GeoPoint>& pts) {
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(xy(frame.to_local(p)));
    return out;
  };

  std::vector<ContourLine> contours;
  for (const auto& [pts, elev] : raw_contours) contours.push_back({local(pts), elev});
  std::vector<Road> roads;
  for (const auto& [pts, name] : raw_roads) roads.push_back({name, local(pts)});

  std::optional<Box> declared_box;
  if (declared) {
    declared_box = Box::inverted();
    for (double lat : {declared->first.latitude, declared->second.latitude})
      for (double lon : {declared->first.longitude, declared->second.longitude})
        declared_box->expand(xy(frame.to_local({lat, lon, std::nullopt})));
  }

  // Terrain is needed to place buildings without an explicit base elevation.
  const EnvironmentMap terrain_only(origin, terrain, ground, {}, contours, {}, declared_box);
  std::vector<Building> buildings;
  for (const auto& rb : raw_buildings) {
    Building b;
    b.id = rb.id;
    b.footprint = local(rb.ring);
    b.roof_height = rb.height;
    if (b.footprint.size() < 3) throw GeometryError("building " + b.id + ": footprint needs at least 3 vertices");
    const double area = signed_area(b.footprint);
    if (!(std::abs(area) > 0.0)) throw GeometryError("building " + b.id + ": footprint has zero area");
    if (!is_simple_polygon(b.footprint)) throw GeometryError("building " + b.id + ": self-intersecting footprint");
    if (area < 0) std::reverse(b.footprint.begin(), b.footprint.end());
    if (rb.base) {
      b.base_elevation = *rb.base;
    } else {
      Vec2 c{0, 0};
      for (const auto& v : b.footprint) c = c + v;
      c = (1.0 / static_cast<double>(b.footprint.size())) * c;
      b.base_elevation = elevation_at(terrain_only, c);
    }
    buildings.push_back(std::move(b));
  }

  return EnvironmentMap(origin, terrain, ground, std::move(buildings), std::move(contours), std::move(roads),
                        declared_box);
}

inline EnvironmentMap load_map(const std::filesystem::path& path, TerrainClass terrain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open map file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed map file " + path.string() + ": " + e.what());
  }
  try {
    return parse_map(doc, terrain);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed map file " + path.string() + ": " + e.what());
  }
}

/// Serializes a map back to the file layout (used by fixtures and tooling).
inline nlohmann::json map_to_json(const EnvironmentMap& map) {
  using nlohmann::json;
  auto pos = [&](Vec2 v) {
    const GeoPoint g = map.to_geo({v.x, v.y, 0.0}, false);
    return json::array({g.longitude, g.latitude});
  };
  json buildings = json::array();
  for (const auto& b : map.buildings()) {
    json ring = json::array();
    for (const auto& v : b.footprint) ring.push_back(pos(v));
    ring.push_back(pos(b.footprint.front()));
    buildings.push_back({{"type", "Feature"},
                         {"id", b.id},
                         {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                         {"properties", {{"height", b.roof_height}, {"base_elevation", b.base_elevation}}}});
  }
  auto lines = [&](const std::vector<Vec2>& pl) {
    json coords = json::array();
    for (const auto& v : pl) coords.push_back(pos(v));
    return coords;
  };
  json contours = json::array();
  for (const auto& c : map.contours())
    contours.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", lines(c.polyline)}}},
                        {"properties", {{"elevation", c.elevation}}}});
  json roads = json::array();
  for (const auto& r : map.roads())
    roads.push_back({{"type", "Feature"},
                     {"geometry", {{"type", "LineString"}, {"coordinates", lines(r.centerline)}}},
                     {"properties", {{"name", r.name}}}});
  const auto& bb = map.bounds();
  const GeoPoint lo = map.to_geo({bb.min_x, bb.min_y, 0}, false), hi = map.to_geo({bb.max_x, bb.max_y, 0}, false);
  return {{"origin", {{"lat", map.origin().latitude}, {"lon", map.origin().longitude}}},
          {"ground_elevation", map.ground_elevation()},
          {"bounds", json::array({lo.longitude, lo.latitude, hi.longitude, hi.latitude})},
          {"layers",
           {{"buildings", {{"type", "FeatureCollection"}, {"features", buildings}}},
            {"contours", {{"type", "FeatureCollection"}, {"features", contours}}},
            {"roads", {{"type", "FeatureCollection"}, {"features", roads}}}}}};
}

} // namespace svmplan::geodata

#endif // SVMPLAN_GEODATA_MAP_IO_HPP
