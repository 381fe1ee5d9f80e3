#ifndef SVMPLAN_PLANNER_SERVICE_HPP
#define SVMPLAN_PLANNER_SERVICE_HPP

#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "svmplan/planner/raster.hpp"

namespace svmplan::planner {

/// Parses the /predict request body into concentrators and a lattice.
/// Missing mast_height defaults to 0, tx_power to 21 dBm, step to 8 m.
inline std::pair<std::vector<Concentrator>, LatticeSpec> parse_predict_request(const std::string& body) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Concentrator> cs;
    const auto& list = j.at("concentrators");
    if (!list.is_array() || list.empty()) throw InvalidArgument("'concentrators' must be a non-empty array");
    for (const auto& c : list) {
      Concentrator k;
      k.antenna.position = {c.at("lat").get<double>(), c.at("lon").get<double>(), std::nullopt};
      k.antenna.mast_height = c.value("mast_height", 0.0);
      k.tx_power = c.value("tx_power", 21.0);
      k.label = c.value("label", "c" + std::to_string(cs.size()));
      require_valid(k);
      cs.push_back(std::move(k));
    }
    const auto& l = j.at("lattice");
    LatticeSpec spec;
    spec.corner_a = {l.at("corner_a").at("lat").get<double>(), l.at("corner_a").at("lon").get<double>(), std::nullopt};
    spec.corner_b = {l.at("corner_b").at("lat").get<double>(), l.at("corner_b").at("lon").get<double>(), std::nullopt};
    if (l.contains("step")) spec.step_x = spec.step_y = l.at("step").get<double>();
    spec.step_x = l.value("step_x", spec.step_x);
    spec.step_y = l.value("step_y", spec.step_y);
    if (!(spec.step_x > 0.0) || !(spec.step_y > 0.0)) throw InvalidArgument("lattice steps must be positive");
    return {std::move(cs), spec};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("request body: ") + e.what());
  }
}

inline nlohmann::json map_meta(const geodata::EnvironmentMap& map) {
  const auto& b = map.bounds();
  return {{"terrain_class", geodata::to_string(map.terrain_class())},
          {"origin", geo_json(map.origin())},
          {"bounds_local", {{"min_x", b.min_x}, {"min_y", b.min_y}, {"max_x", b.max_x}, {"max_y", b.max_y}}},
          {"bounds",
           {{"south_west", geo_json(map.to_geo({b.min_x, b.min_y, 0.0}, false))},
            {"north_east", geo_json(map.to_geo({b.max_x, b.max_y, 0.0}, false))}}},
          {"layers",
           {{"buildings", map.buildings().size()},
            {"contours", map.contours().size()},
            {"roads", map.roads().size()}}}};
}

/// Stateless planning API: GET /health, GET /map/meta, POST /predict.
/// Every handler reads only the immutable map, models and budget.
class PlannerService {
public:
  PlannerService(const geodata::EnvironmentMap& map, const TrainedModels& models, LinkBudget budget,
                 Pm2Options options = {})
      : map_(map), models_(models), budget_(budget), options_(options) {
    svm::require_terrain(models_, map_.terrain_class());
    // Address reuse only: a port already served by another process must fail to bind.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    server_.Get("/map/meta", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(map_meta(map_).dump(), "application/json");
    });
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(predict_body(req.body), "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump(), "application/json");
      }
    });
  }

  /// Response body for a /predict request; identical to serializing
  /// run_pm2 on the same inputs.
  std::string predict_body(const std::string& request) const {
    const auto [concentrators, lattice] = parse_predict_request(request);
    return raster_to_json(map_, run_pm2(map_, concentrators, budget_, models_, lattice, options_)).dump();
  }

  /// Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw BindError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }
  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

private:
  const geodata::EnvironmentMap& map_;
  const TrainedModels& models_;
  LinkBudget budget_;
  Pm2Options options_;
  httplib::Server server_;
};

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_SERVICE_HPP
