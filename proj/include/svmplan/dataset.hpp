#ifndef SVMPLAN_DATASET_HPP
#define SVMPLAN_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "svmplan/features.hpp"
#include "svmplan/parallel.hpp"

namespace svmplan::dataset {

using features::FeatureVector;
using geodata::GeoPoint;

/// Conventional RSS for "no coverage" and the receiver sensitivity, dBm.
inline constexpr double kNoCoverageRssi = -120.0;
inline constexpr double kSensitivity = -119.0;

struct Measurement {
  std::string timestamp; // ISO-8601
  GeoPoint position;     // GPS estimate, altitude from the receiver
  double speed = 0.0;    // m/s
  double heading = 0.0;  // degrees
  int satellite_count = 0;
  std::string meter_address;
  double rssi = 0.0; // dBm
};

inline bool valid_rssi(double rssi) { return rssi == kNoCoverageRssi || rssi >= kSensitivity; }

inline const std::vector<std::string>& measurement_columns() {
  static const std::vector<std::string> cols{"timestamp",   "lat",        "lon",           "alt_m",   "speed_mps",
                                             "heading_deg", "satellites", "meter_address", "rssi_dbm"};
  return cols;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t row, const char* col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": column '" + col + "' is not a number: '" + s + "'");
  }
}

} // namespace detail

/// Parses a measurement log. `row` numbers in errors are 1-based file lines.
/// Extra trailing columns are ignored and reported through `warnings`.
inline std::vector<Measurement> parse_measurements(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  static const std::regex iso8601(R"(^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  std::vector<Measurement> out;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::size_t extra = 0;
  const auto& cols = measurement_columns();
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < cols.size() || !std::equal(cols.begin(), cols.end(), fields.begin()))
        throw ParseError("row " + std::to_string(row) + ": header must start with columns timestamp,lat,lon,alt_m,"
                         "speed_mps,heading_deg,satellites,meter_address,rssi_dbm");
      extra = fields.size() - cols.size();
      if (extra > 0 && warnings)
        warnings->push_back("measurement log has " + std::to_string(extra) + " extra column(s); ignored");
      continue;
    }
    if (fields.size() < cols.size())
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(cols.size()) + " columns, got " +
                       std::to_string(fields.size()));
    Measurement m;
    m.timestamp = fields[0];
    if (!std::regex_match(m.timestamp, iso8601))
      throw ParseError("row " + std::to_string(row) + ": timestamp is not ISO-8601: '" + m.timestamp + "'");
    m.position.latitude = detail::parse_double(fields[1], row, "lat");
    m.position.longitude = detail::parse_double(fields[2], row, "lon");
    if (!fields[3].empty()) m.position.altitude = detail::parse_double(fields[3], row, "alt_m");
    if (!m.position.valid())
      throw RangeError("row " + std::to_string(row) + ": coordinates out of WGS-84 range");
    m.speed = detail::parse_double(fields[4], row, "speed_mps");
    m.heading = detail::parse_double(fields[5], row, "heading_deg");
    const double sats = detail::parse_double(fields[6], row, "satellites");
    if (sats < 0 || sats != std::floor(sats))
      throw RangeError("row " + std::to_string(row) + ": satellites must be a non-negative integer");
    m.satellite_count = static_cast<int>(sats);
    m.meter_address = fields[7];
    m.rssi = detail::parse_double(fields[8], row, "rssi_dbm");
    if (!valid_rssi(m.rssi))
      throw RangeError("row " + std::to_string(row) + ": rssi " + fields[8] +
                       " dBm is neither -120 (no coverage) nor >= -119 (sensitivity)");
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Measurement> load_measurements(const std::filesystem::path& path,
                                                  std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open measurement log " + path.string());
  return parse_measurements(in, warnings);
}

inline void write_measurements(std::ostream& out, const std::vector<Measurement>& rows) {
  const auto& cols = measurement_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const auto& m : rows) {
    line.str({});
    line << m.timestamp << ',' << m.position.latitude << ',' << m.position.longitude << ','
         << m.position.altitude.value_or(0.0) << ',' << m.speed << ',' << m.heading << ',' << m.satellite_count << ','
         << m.meter_address << ',' << m.rssi << '\n';
    out << line.str();
  }
}

struct LabeledSample {
  FeatureVector features{};
  double rssi = 0.0;
  int label = -1; // +1 coverage, -1 no coverage
  std::string source_area;
  GeoPoint position; // receiver location the features were computed for

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

inline int coverage_label(double rssi) { return rssi >= kSensitivity ? +1 : -1; }

inline LabeledSample label(const Measurement& m, const FeatureVector& fv, const std::string& area) {
  return {fv, m.rssi, coverage_label(m.rssi), area, m.position};
}

struct SampleOptions {
  double rx_height = 1.5;      // receiver antenna above ground
  bool snap_to_roads = false;  // project GPS fixes onto road centerlines
  double road_gate = 30.0;
  features::FeatureOptions features;
  unsigned workers = 1;
};

/// Features and labels for every measurement of one campaign.
inline std::vector<LabeledSample> make_samples(const geodata::EnvironmentMap& map, const features::Antenna& tx,
                                               const std::vector<Measurement>& measurements, const std::string& area,
                                               const SampleOptions& opt = {}) {
  std::vector<LabeledSample> out(measurements.size());
  const bool snap = opt.snap_to_roads && !map.roads().empty();
  parallel_for(measurements.size(), opt.workers, [&](std::size_t i) {
    GeoPoint pos = measurements[i].position;
    if (snap) pos = geodata::project_to_road(map, pos, opt.road_gate).point;
    const features::Antenna rx{pos, opt.rx_height};
    out[i] = label(measurements[i], features::extract_features(map, tx, rx, opt.features), area);
    out[i].position = pos;
  });
  return out;
}

struct SplitDataset {
  std::vector<LabeledSample> train_cls;
  std::vector<LabeledSample> test_cls;
  std::vector<LabeledSample> train_reg;
  std::vector<LabeledSample> test_reg;
  std::uint64_t seed = 0;
};

inline std::vector<LabeledSample> covered_only(const std::vector<LabeledSample>& s) {
  std::vector<LabeledSample> out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out), [](const LabeledSample& x) { return x.label == +1; });
  return out;
}

/// Number of training samples: round-half-up of fraction * n.
inline std::size_t train_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

/// Seeded uniform shuffle, then the first round(fraction * N) samples train.
/// Regression sets keep only covered samples of each side, renumbered.
inline SplitDataset permute_and_split(std::vector<LabeledSample> samples, std::uint64_t seed,
                                      double train_fraction = 0.8) {
  if (samples.size() < 5)
    throw InsufficientData("permute_and_split needs at least 5 samples, got " + std::to_string(samples.size()));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train_fraction must be in (0, 1)");
  std::mt19937_64 rng(seed);
  std::shuffle(samples.begin(), samples.end(), rng);
  const std::size_t n_train = train_count(samples.size(), train_fraction);
  SplitDataset out;
  out.seed = seed;
  out.train_cls.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_cls.assign(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
  out.train_reg = covered_only(out.train_cls);
  out.test_reg = covered_only(out.test_cls);
  return out;
}

/// Keeps the samples the classifier places inside the coverage area.
template <class Decide>
std::vector<LabeledSample> filter_test_by_decision(const std::vector<LabeledSample>& test_reg, Decide&& decide) {
  std::vector<LabeledSample> out;
  for (const auto& s : test_reg)
    if (decide(s.features) == +1) out.push_back(s);
  return out;
}

inline double positive_fraction(const std::vector<LabeledSample>& s) {
  if (s.empty()) return 0.0;
  const auto pos = std::count_if(s.begin(), s.end(), [](const LabeledSample& x) { return x.label == +1; });
  return static_cast<double>(pos) / static_cast<double>(s.size());
}

/// Balance check: warn when the covered fraction is outside [0.3, 0.7].
inline std::optional<std::string> balance_warning(const std::vector<LabeledSample>& s) {
  const double f = positive_fraction(s);
  if (f < 0.3 || f > 0.7) {
    std::ostringstream os;
    os.precision(3);
    os << "class balance: " << f * 100.0 << "% of samples are covered (outside the 30-70% band)";
    return os.str();
  }
  return std::nullopt;
}

} // namespace svmplan::dataset

#endif // SVMPLAN_DATASET_HPP
