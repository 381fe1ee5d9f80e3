#ifndef SVMPLAN_PLANNER_RASTER_HPP
#define SVMPLAN_PLANNER_RASTER_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmplan/geodata/polygon.hpp"
#include "svmplan/parallel.hpp"
#include "svmplan/planner/budget.hpp"
#include "svmplan/planner/modes.hpp"

namespace svmplan::planner {

/// Rectangle given by two opposite corners, sampled every step meters.
struct LatticeSpec {
  geodata::GeoPoint corner_a;
  geodata::GeoPoint corner_b;
  double step_x = 8.0;
  double step_y = 8.0;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Nodes along an axis of the given extent: ceil(extent / step) + 1. The
/// small slack keeps exact multiples from gaining a node to rounding.
inline std::size_t axis_nodes(double extent, double step) {
  if (!(step > 0.0)) throw InvalidArgument("lattice step must be positive");
  return static_cast<std::size_t>(std::ceil(extent / step - 1e-9)) + 1;
}

/// Local-frame placement of a lattice: node (row, col) lies at
/// x = min_x + col * step_x, y = max_y - row * step_y (row 0 is north).
struct LatticeGeometry {
  double min_x = 0, max_y = 0;
  double step_x = 8, step_y = 8;
  std::size_t cols = 0, rows = 0;

  geodata::Vec2 node(std::size_t row, std::size_t col) const {
    return {min_x + static_cast<double>(col) * step_x, max_y - static_cast<double>(row) * step_y};
  }
  std::size_t size() const { return rows * cols; }
};

inline LatticeGeometry lattice_geometry(const geodata::EnvironmentMap& map, const LatticeSpec& spec) {
  if (!spec.corner_a.valid() || !spec.corner_b.valid()) throw InvalidArgument("lattice corners must be valid");
  const auto a = map.to_local(spec.corner_a), b = map.to_local(spec.corner_b);
  if (std::abs(a.x - b.x) < 1e-9 && std::abs(a.y - b.y) < 1e-9) throw InvalidArgument("lattice corners coincide");
  LatticeGeometry g;
  g.min_x = std::min(a.x, b.x);
  g.max_y = std::max(a.y, b.y);
  g.step_x = spec.step_x;
  g.step_y = spec.step_y;
  g.cols = axis_nodes(std::abs(a.x - b.x), spec.step_x);
  g.rows = axis_nodes(std::abs(a.y - b.y), spec.step_y);
  return g;
}

template <class T>
using Grid = std::vector<std::vector<T>>; // [row][col]

struct ConcentratorLayer {
  std::string label;
  double tx_power = 21.0;
  Grid<double> rss;              // adjusted RSS where the classifier covers, -120 elsewhere
  Grid<std::uint8_t> coverage;   // classifier decision +1
  Grid<std::uint8_t> budget_coverage; // adjusted RSS >= sensitivity

  friend bool operator==(const ConcentratorLayer&, const ConcentratorLayer&) = default;
};

struct CoverageRaster {
  LatticeSpec lattice;
  LatticeGeometry geometry;
  std::vector<ConcentratorLayer> layers;
  Grid<int> best_server;             // concentrator index, -1 where nobody covers
  Grid<std::uint8_t> inside_building;

  std::size_t rows() const { return geometry.rows; }
  std::size_t cols() const { return geometry.cols; }

  friend bool operator==(const CoverageRaster& a, const CoverageRaster& b) {
    return a.lattice == b.lattice && a.layers == b.layers && a.best_server == b.best_server &&
           a.inside_building == b.inside_building;
  }
};

/// Argmax of adjusted RSS among the concentrators covering one node; ties go
/// to the lowest index, -1 when none covers.
inline int best_server_at(const std::vector<double>& adjusted, const std::vector<bool>& covered) {
  int best = -1;
  for (std::size_t k = 0; k < adjusted.size(); ++k)
    if (covered[k] && (best < 0 || adjusted[k] > adjusted[static_cast<std::size_t>(best)]))
      best = static_cast<int>(k);
  return best;
}

inline Grid<int> best_server_grid(const std::vector<ConcentratorLayer>& layers, std::size_t rows, std::size_t cols) {
  Grid<int> out(rows, std::vector<int>(cols, -1));
  std::vector<double> adj(layers.size());
  std::vector<bool> cov(layers.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t k = 0; k < layers.size(); ++k) {
        adj[k] = layers[k].rss[r][c];
        cov[k] = layers[k].coverage[r][c] != 0;
      }
      out[r][c] = best_server_at(adj, cov);
    }
  return out;
}

inline bool inside_any_building(const geodata::EnvironmentMap& map, geodata::Vec2 p) {
  for (const auto& b : map.buildings())
    if (b.box.contains(p) && geodata::point_in_polygon(b.footprint, p)) return true;
  return false;
}

struct Pm2Options {
  double rx_height = 1.5;
  features::FeatureOptions features;
  unsigned workers = 1;
};

/// Blind raster prediction for every lattice node and concentrator.
inline CoverageRaster run_pm2(const geodata::EnvironmentMap& map, const std::vector<Concentrator>& concentrators,
                              const LinkBudget& budget, const TrainedModels& models, const LatticeSpec& lattice,
                              const Pm2Options& opt = {}) {
  svm::require_terrain(models, map.terrain_class());
  if (concentrators.empty()) throw InvalidArgument("PM2 needs at least one concentrator");
  for (const auto& c : concentrators) require_valid(c);
  CoverageRaster out;
  out.lattice = lattice;
  out.geometry = lattice_geometry(map, lattice);
  const auto& g = out.geometry;
  for (const auto& c : concentrators) {
    ConcentratorLayer l;
    l.label = c.label;
    l.tx_power = c.tx_power;
    l.rss.assign(g.rows, std::vector<double>(g.cols, dataset::kNoCoverageRssi));
    l.coverage.assign(g.rows, std::vector<std::uint8_t>(g.cols, 0));
    l.budget_coverage = l.coverage;
    out.layers.push_back(std::move(l));
  }
  out.inside_building.assign(g.rows, std::vector<std::uint8_t>(g.cols, 0));
  const Predictor p{models};
  parallel_for(g.size(), opt.workers, [&](std::size_t i) {
    const std::size_t r = i / g.cols, c = i % g.cols;
    const auto xy = g.node(r, c);
    out.inside_building[r][c] = inside_any_building(map, xy);
    const features::Antenna rx{map.to_geo({xy.x, xy.y, 0.0}, false), opt.rx_height};
    for (std::size_t k = 0; k < concentrators.size(); ++k) {
      auto& l = out.layers[k];
      const auto fv = features::extract_features(map, concentrators[k].antenna, rx, opt.features);
      if (p.decide(fv) != +1) continue;
      l.coverage[r][c] = 1;
      l.rss[r][c] = adjusted_rss(p.predict(fv), concentrators[k].tx_power, budget);
      l.budget_coverage[r][c] = l.rss[r][c] >= budget.sensitivity;
    }
  });
  out.best_server = best_server_grid(out.layers, g.rows, g.cols);
  return out;
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct LegendBin {
  double lower = 0.0; // dBm, inclusive
  double upper = 0.0; // dBm, exclusive (the top bin also takes larger values)
  Rgb color;
};

inline constexpr Rgb kNoCoverageColor{255, 255, 255};

/// Ten 10 dBm bins from -120 to -20 dBm, cold to hot.
inline const std::array<LegendBin, 10>& legend() {
  static const std::array<LegendBin, 10> bins{{
      {-120, -110, {49, 54, 149}},
      {-110, -100, {69, 117, 180}},
      {-100, -90, {116, 173, 209}},
      {-90, -80, {171, 217, 233}},
      {-80, -70, {224, 243, 248}},
      {-70, -60, {254, 224, 144}},
      {-60, -50, {253, 174, 97}},
      {-50, -40, {244, 109, 67}},
      {-40, -30, {215, 48, 39}},
      {-30, -20, {165, 0, 38}},
  }};
  return bins;
}

inline std::size_t legend_bin(double rss) {
  const double k = std::floor((rss - legend().front().lower) / 10.0);
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(legend().size() - 1)));
}

/// Distinct colors for best-server maps, cycled beyond eight concentrators.
inline Rgb server_color(int index) {
  static const std::array<Rgb, 8> palette{{{228, 26, 28}, {55, 126, 184}, {77, 175, 74}, {152, 78, 163},
                                           {255, 127, 0}, {166, 86, 40}, {247, 129, 191}, {153, 153, 153}}};
  if (index < 0) return kNoCoverageColor;
  return palette[static_cast<std::size_t>(index) % palette.size()];
}

inline std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

inline nlohmann::json legend_json() {
  auto j = nlohmann::json::array();
  for (const auto& b : legend()) j.push_back({{"lower_dbm", b.lower}, {"upper_dbm", b.upper}, {"color", hex(b.color)}});
  return j;
}

inline nlohmann::json geo_json(const geodata::GeoPoint& p) { return {{"lat", p.latitude}, {"lon", p.longitude}}; }

inline nlohmann::json raster_to_json(const geodata::EnvironmentMap& map, const CoverageRaster& r) {
  using nlohmann::json;
  const auto& g = r.geometry;
  const auto nw = g.node(0, 0), se = g.node(g.rows - 1, g.cols - 1);
  json j;
  j["lattice"] = {{"corner_a", geo_json(r.lattice.corner_a)},
                  {"corner_b", geo_json(r.lattice.corner_b)},
                  {"step_x", r.lattice.step_x},
                  {"step_y", r.lattice.step_y},
                  {"rows", g.rows},
                  {"cols", g.cols},
                  {"north_west_node", geo_json(map.to_geo({nw.x, nw.y, 0.0}, false))},
                  {"south_east_node", geo_json(map.to_geo({se.x, se.y, 0.0}, false))}};
  j["concentrators"] = json::array();
  for (const auto& l : r.layers)
    j["concentrators"].push_back({{"label", l.label},
                                  {"tx_power", l.tx_power},
                                  {"rss", l.rss},
                                  {"coverage", l.coverage},
                                  {"budget_coverage", l.budget_coverage}});
  j["best_server"] = r.best_server;
  j["inside_building"] = r.inside_building;
  j["legend"] = legend_json();
  j["notes"] = {{"coverage", "classifier decision"},
                {"budget_coverage", "adjusted RSS at or above the receiver sensitivity"},
                {"power_adjustment", "additive: predicted RSS + (tx_power - reference_tx_power)"}};
  return j;
}

/// Inverse of raster_to_json; the node geometry is recomputed from the map.
inline CoverageRaster raster_from_json(const geodata::EnvironmentMap& map, const nlohmann::json& j) {
  auto geo = [](const nlohmann::json& p) {
    return geodata::GeoPoint{p.at("lat").get<double>(), p.at("lon").get<double>(), std::nullopt};
  };
  try {
    CoverageRaster r;
    const auto& l = j.at("lattice");
    r.lattice = {geo(l.at("corner_a")), geo(l.at("corner_b")), l.at("step_x").get<double>(),
                 l.at("step_y").get<double>()};
    r.geometry = lattice_geometry(map, r.lattice);
    if (l.at("rows").get<std::size_t>() != r.geometry.rows || l.at("cols").get<std::size_t>() != r.geometry.cols)
      throw SchemaError("raster: lattice size does not match the map frame");
    for (const auto& c : j.at("concentrators")) {
      ConcentratorLayer layer;
      layer.label = c.at("label").get<std::string>();
      layer.tx_power = c.at("tx_power").get<double>();
      layer.rss = c.at("rss").get<Grid<double>>();
      layer.coverage = c.at("coverage").get<Grid<std::uint8_t>>();
      layer.budget_coverage = c.at("budget_coverage").get<Grid<std::uint8_t>>();
      r.layers.push_back(std::move(layer));
    }
    r.best_server = j.at("best_server").get<Grid<int>>();
    r.inside_building = j.at("inside_building").get<Grid<std::uint8_t>>();
    auto check = [&](const auto& grid) {
      if (grid.size() != r.geometry.rows) throw SchemaError("raster: grid row count mismatch");
      for (const auto& row : grid)
        if (row.size() != r.geometry.cols) throw SchemaError("raster: grid column count mismatch");
    };
    for (const auto& layer : r.layers) {
      check(layer.rss);
      check(layer.coverage);
      check(layer.budget_coverage);
    }
    check(r.best_server);
    check(r.inside_building);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("raster: ") + e.what());
  }
}

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_RASTER_HPP
