#ifndef SVMPLAN_PLANNER_EXPORT_HPP
#define SVMPLAN_PLANNER_EXPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "svmplan/planner/raster.hpp"
#include "svmplan/svm/model_io.hpp"

namespace svmplan::planner {

inline constexpr const char* kVersion = "1.0.0";

/// Identifies the run that produced an artifact.
struct Provenance {
  std::string command;
  std::string config_hash; // 8 hex digits, CRC-32 of the canonical config
  std::uint64_t seed = 0;

  std::string line() const {
    return "command=" + command + " config=" + config_hash + " seed=" + std::to_string(seed);
  }
};

inline std::string config_hash(const nlohmann::json& config) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", svm::crc32_of(config.dump()));
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

enum class RasterView { Rss, BestServer };

/// Binary PPM, one pixel per lattice node, north up. The RSS view colors a
/// single concentrator's layer with the legend; the best-server view uses
/// one color per concentrator. Uncovered nodes are white.
inline std::string render_ppm(const CoverageRaster& r, RasterView view, std::size_t layer,
                              const Provenance& prov) {
  if (view == RasterView::Rss && layer >= r.layers.size()) throw InvalidArgument("no such concentrator layer");
  std::string out = "P6\n# svmplan " + prov.line() + "\n" + std::to_string(r.cols()) + " " +
                    std::to_string(r.rows()) + "\n255\n";
  for (std::size_t row = 0; row < r.rows(); ++row)
    for (std::size_t col = 0; col < r.cols(); ++col) {
      Rgb c = kNoCoverageColor;
      if (view == RasterView::BestServer) {
        c = server_color(r.best_server[row][col]);
      } else if (r.layers[layer].coverage[row][col]) {
        c = legend()[legend_bin(r.layers[layer].rss[row][col])].color;
      }
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
  return out;
}

/// Plain-text georeference for a PPM: node-center corner coordinates and
/// steps, one key=value per line.
inline std::string render_georef(const geodata::EnvironmentMap& map, const CoverageRaster& r,
                                 const Provenance& prov) {
  const auto& g = r.geometry;
  const auto nw = map.to_geo({g.node(0, 0).x, g.node(0, 0).y, 0.0}, false);
  const auto se = map.to_geo({g.node(g.rows - 1, g.cols - 1).x, g.node(g.rows - 1, g.cols - 1).y, 0.0}, false);
  std::ostringstream os;
  os.precision(12);
  os << "# svmplan " << prov.line() << '\n'
     << "crs=WGS84\n"
     << "cols=" << g.cols << "\nrows=" << g.rows << '\n'
     << "step_x_m=" << g.step_x << "\nstep_y_m=" << g.step_y << '\n'
     << "north_west_lat=" << nw.latitude << "\nnorth_west_lon=" << nw.longitude << '\n'
     << "south_east_lat=" << se.latitude << "\nsouth_east_lon=" << se.longitude << '\n'
     << "pixel=node-center\n";
  return os.str();
}

/// Covered area of one layer as GeoJSON polygons: each node stands for a
/// step-sized cell around it, horizontal runs of covered cells merge into
/// one rectangle.
inline nlohmann::json coverage_geojson(const geodata::EnvironmentMap& map, const CoverageRaster& r,
                                       const Provenance& prov, bool budget = false) {
  using nlohmann::json;
  const auto& g = r.geometry;
  json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
  fc["properties"] = {{"command", prov.command}, {"config_hash", prov.config_hash}, {"seed", prov.seed}};
  auto corner = [&](double x, double y) {
    const auto p = map.to_geo({x, y, 0.0}, false);
    return json::array({p.longitude, p.latitude});
  };
  for (std::size_t k = 0; k < r.layers.size(); ++k) {
    const auto& grid = budget ? r.layers[k].budget_coverage : r.layers[k].coverage;
    json polys = json::array();
    for (std::size_t row = 0; row < g.rows; ++row) {
      std::size_t col = 0;
      while (col < g.cols) {
        if (!grid[row][col]) {
          ++col;
          continue;
        }
        const std::size_t start = col;
        while (col < g.cols && grid[row][col]) ++col;
        const auto a = g.node(row, start), b = g.node(row, col - 1);
        const double x0 = a.x - g.step_x / 2, x1 = b.x + g.step_x / 2;
        const double y0 = a.y - g.step_y / 2, y1 = a.y + g.step_y / 2;
        polys.push_back(json::array({json::array(
            {corner(x0, y0), corner(x1, y0), corner(x1, y1), corner(x0, y1), corner(x0, y0)})}));
      }
    }
    fc["features"].push_back({{"type", "Feature"},
                               {"properties",
                                {{"concentrator", r.layers[k].label},
                                 {"index", k},
                                 {"coverage", budget ? "budget" : "classifier"}}},
                               {"geometry", {{"type", "MultiPolygon"}, {"coordinates", polys}}}});
  }
  return fc;
}

/// Diff-friendly evaluation report: provenance, one results-table row, the
/// raw counts and any warnings.
inline std::string render_evaluation(const Provenance& prov, const std::string& area, Mode mode,
                                     const EvaluationReport& r, const std::vector<std::string>& warnings = {},
                                     const std::vector<std::string>& notes = {}) {
  std::ostringstream os;
  os << "# svmplan " << prov.line() << '\n'
     << table_header() << render_row(area, mode, r) << '\n'
     << '\n'
     << "n_test=" << r.n_test << '\n'
     << "n_correct=" << r.n_correct << '\n'
     << "n_false_positive=" << r.n_false_positive << '\n'
     << "n_full_scale=" << r.n_full_scale << '\n'
     << "n_regression=" << r.n_regression << '\n';
  for (const auto& n : notes) os << "note: " << n << '\n';
  for (const auto& w : warnings) os << "warning: " << w << '\n';
  return os.str();
}

/// Run manifest: command, configuration, its hash, seed, model checksum,
/// produced files and versions.
inline nlohmann::json manifest(const Provenance& prov, const nlohmann::json& config, const std::string& model_crc,
                               const std::vector<std::string>& outputs) {
  return {{"command", prov.command},
          {"config", config},
          {"config_hash", prov.config_hash},
          {"seed", prov.seed},
          {"model_checksum", model_crc},
          {"outputs", outputs},
          {"versions", {{"svmplan", kVersion}, {"model_format", svm::kModelFormatVersion}}}};
}

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_EXPORT_HPP
