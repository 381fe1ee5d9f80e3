#ifndef SVMPLAN_SVM_MODEL_IO_HPP
#define SVMPLAN_SVM_MODEL_IO_HPP

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmplan/features.hpp"
#include "svmplan/svm/models.hpp"
#include "svmplan/svm/scaler.hpp"

namespace svmplan::svm {

/// Everything a prediction needs: scaler, both models and the provenance
/// used by the leakage and terrain guards.
struct TrainedModels {
  geodata::TerrainClass terrain = geodata::TerrainClass::Flat;
  std::vector<std::string> training_areas; // "town/district" tags
  Scaler scaler;
  SvcModel svc;
  SvrModel svr;
  double reference_tx_power = 21.0; // dBm at which training data were acquired
  std::uint64_t seed = 0;
  std::string strategy; // "best" or "bounded"
  std::string provenance; // producing command, config hash and seed

  friend bool operator==(const TrainedModels&, const TrainedModels&) = default;
};

inline void require_terrain(const TrainedModels& m, geodata::TerrainClass map_class) {
  if (m.terrain != map_class)
    throw TerrainClassMismatch("models were trained on " + std::string(geodata::to_string(m.terrain)) +
                               " terrain but the map is " + std::string(geodata::to_string(map_class)));
}

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelMagic = "SVMPLAN-MODEL";

inline std::uint32_t crc32_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

namespace detail {

using nlohmann::json;

template <std::size_t Dim>
json expansion_to_json(const KernelExpansion<Dim>& m) {
  json j;
  j["gamma"] = m.kernel.gamma;
  j["c"] = m.c_param;
  j["bias"] = m.bias;
  j["support_vectors"] = m.support_vectors;
  j["coefficients"] = m.coefficients;
  j["training"] = {{"iterations", m.info.iterations},
                   {"max_violation", m.info.max_violation},
                   {"objective", m.info.objective},
                   {"equality_residual", m.info.equality_residual},
                   {"n_samples", m.info.n_samples}};
  return j;
}

template <std::size_t Dim>
void expansion_from_json(const json& j, KernelExpansion<Dim>& m) {
  m.kernel.gamma = j.at("gamma").get<double>();
  m.c_param = j.at("c").get<double>();
  m.bias = j.at("bias").get<double>();
  m.support_vectors = j.at("support_vectors").get<std::vector<std::array<double, Dim>>>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  const auto& t = j.at("training");
  m.info.iterations = t.at("iterations").get<std::uint64_t>();
  m.info.max_violation = t.at("max_violation").get<double>();
  m.info.objective = t.at("objective").get<double>();
  m.info.equality_residual = t.at("equality_residual").get<double>();
  m.info.n_samples = t.at("n_samples").get<std::size_t>();
  if (m.support_vectors.size() != m.coefficients.size())
    throw SchemaError("model: support vector and coefficient counts differ");
  if (!(m.kernel.gamma > 0.0) || !(m.c_param > 0.0)) throw SchemaError("model: gamma and C must be positive");
  const double slack = 1e-9 * m.c_param;
  for (double c : m.coefficients)
    if (std::abs(c) > m.c_param + slack) throw SchemaError("model: coefficient outside the box [-C, C]");
}

} // namespace detail

/// Payload layout (JSON object):
///   terrain, feature_order[7], training_areas[], reference_tx_power, seed,
///   strategy, provenance (optional), scaler{means[7], std_devs[7]},
///   svc{gamma, c, bias, support_vectors[][7], coefficients[], training{...}},
///   svr{... as svc ..., epsilon}
/// The file is one header line "SVMPLAN-MODEL <version> <crc32 hex> <bytes>"
/// followed by exactly <bytes> bytes of payload.
inline std::string serialize_models(const TrainedModels& m) {
  using nlohmann::json;
  json j;
  j["terrain"] = geodata::to_string(m.terrain);
  json order = json::array();
  for (auto n : features::feature_names(m.terrain)) order.push_back(std::string(n));
  j["feature_order"] = order;
  j["training_areas"] = m.training_areas;
  j["reference_tx_power"] = m.reference_tx_power;
  j["seed"] = m.seed;
  j["strategy"] = m.strategy;
  if (!m.provenance.empty()) j["provenance"] = m.provenance;
  j["scaler"] = {{"means", m.scaler.means}, {"std_devs", m.scaler.std_devs}};
  j["svc"] = detail::expansion_to_json(m.svc);
  j["svr"] = detail::expansion_to_json(m.svr);
  j["svr"]["epsilon"] = m.svr.epsilon;
  const std::string payload = j.dump(1);
  char header[96];
  std::snprintf(header, sizeof header, "%s %d %08x %zu\n", kModelMagic, kModelFormatVersion, crc32_of(payload),
                payload.size());
  return header + payload;
}

inline TrainedModels parse_models(const std::string& bytes) {
  using nlohmann::json;
  const auto nl = bytes.find('\n');
  const std::string magic = kModelMagic;
  if (bytes.compare(0, magic.size(), magic) != 0) throw ParseError("not a model file (missing header)");
  if (nl == std::string::npos) throw ChecksumError("model file truncated inside the header");
  std::istringstream hs(bytes.substr(0, nl));
  std::string tag, crc_hex;
  int version = 0;
  std::size_t length = 0;
  if (!(hs >> tag >> version >> crc_hex >> length)) throw ParseError("malformed model header");
  if (version != kModelFormatVersion)
    throw VersionMismatch("model format version " + std::to_string(version) + ", expected " +
                          std::to_string(kModelFormatVersion));
  const std::string payload = bytes.substr(nl + 1);
  if (payload.size() != length)
    throw ChecksumError("model payload is " + std::to_string(payload.size()) + " bytes, header declares " +
                        std::to_string(length));
  std::uint32_t expected = 0;
  try {
    expected = static_cast<std::uint32_t>(std::stoul(crc_hex, nullptr, 16));
  } catch (const std::exception&) {
    throw ParseError("malformed checksum in model header");
  }
  if (crc32_of(payload) != expected) throw ChecksumError("model payload checksum mismatch");

  TrainedModels m;
  try {
    const json j = json::parse(payload);
    m.terrain = geodata::terrain_class_from_string(j.at("terrain").get<std::string>());
    const auto order = j.at("feature_order").get<std::vector<std::string>>();
    const auto names = features::feature_names(m.terrain);
    if (order.size() != names.size() || !std::equal(order.begin(), order.end(), names.begin()))
      throw SchemaError("model feature order does not match the " + std::string(geodata::to_string(m.terrain)) +
                        " feature set");
    m.training_areas = j.at("training_areas").get<std::vector<std::string>>();
    m.reference_tx_power = j.at("reference_tx_power").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.strategy = j.at("strategy").get<std::string>();
    m.provenance = j.value("provenance", std::string());
    m.scaler.means = j.at("scaler").at("means").get<std::array<double, 7>>();
    m.scaler.std_devs = j.at("scaler").at("std_devs").get<std::array<double, 7>>();
    for (double s : m.scaler.std_devs)
      if (!(s > 0.0)) throw SchemaError("model scaler has a non-positive standard deviation");
    detail::expansion_from_json(j.at("svc"), m.svc);
    detail::expansion_from_json(j.at("svr"), m.svr);
    m.svr.epsilon = j.at("svr").at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model payload: ") + e.what());
  }
  return m;
}

inline void save_model(const std::filesystem::path& path, const TrainedModels& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write model file " + path.string());
  out << serialize_models(m);
  if (!out) throw InvalidArgument("failed writing model file " + path.string());
}

inline TrainedModels load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_models(bytes);
}

} // namespace svmplan::svm

#endif // SVMPLAN_SVM_MODEL_IO_HPP
