// svmplan command-line front end: validate, features, train, pm1, pm2, pm3,
// serve and export. Run `svmplan <command> --help` for the flags.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "svmplan/svmplan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svmplan;
using namespace svmplan::planner;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex8(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string file_crc(const fs::path& p) { return hex8(svm::crc32_of(read_bytes(p))); }

std::vector<double> split_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

/// "lat,lon,mast_height"
features::Antenna parse_antenna(const std::string& s) {
  const auto v = split_numbers(s, "--tx");
  if (v.size() != 3) throw InvalidArgument("--tx expects lat,lon,mast_height");
  return {{v[0], v[1], std::nullopt}, v[2]};
}

/// "lat,lon,mast_height,tx_power[,label]"
Concentrator parse_concentrator(const std::string& s, std::size_t index) {
  std::string numbers = s, label = "c" + std::to_string(index);
  std::size_t commas = 0, cut = std::string::npos;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == ',' && ++commas == 4) cut = i;
  if (cut != std::string::npos) {
    numbers = s.substr(0, cut);
    label = s.substr(cut + 1);
  }
  const auto v = split_numbers(numbers, "--concentrator");
  if (v.size() != 4) throw InvalidArgument("--concentrator expects lat,lon,mast_height,tx_power[,label]");
  Concentrator c{{{v[0], v[1], std::nullopt}, v[2]}, v[3], label};
  require_valid(c);
  return c;
}

geodata::GeoPoint parse_corner(const std::string& s, const char* flag) {
  const auto v = split_numbers(s, flag);
  if (v.size() != 2) throw InvalidArgument(std::string(flag) + " expects lat,lon");
  return {v[0], v[1], std::nullopt};
}

/// "lo:hi" exponent range.
std::pair<int, int> parse_range(const std::string& s, const char* flag) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    std::size_t a = 0, b = 0;
    const int lo = std::stoi(s.substr(0, colon), &a), hi = std::stoi(s.substr(colon + 1), &b);
    if (a != colon || b != s.size() - colon - 1 || lo > hi) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::exception&) {
    throw InvalidArgument(std::string(flag) + " expects lo:hi with lo <= hi, got '" + s + "'");
  }
}

Mode parse_variant(const std::string& s) {
  if (s == "3") return Mode::PM3;
  if (s == "3'" || s == "3p" || s == "3prime") return Mode::PM3Prime;
  throw InvalidArgument("--variant must be 3 or 3' (also spelled 3p)");
}

/// Flags shared by several commands; each command registers the subset it uses.
struct Flags {
  std::string map, terrain, measurements, model, tx, area = "local/area", out = "out", raster, strategy = "best";
  std::string host = "127.0.0.1", variant = "3";
  double tx_power = 21.0;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  int port = 8080;
  std::vector<std::string> concentrators, campaigns;
  std::string corner_a, corner_b;
  double step = 8.0;
  std::string cls_c, cls_gamma, reg_c, reg_gamma;
  int grid_step = 1;
  std::size_t folds = 5;
  double epsilon = 3.0;
  std::optional<double> accuracy_bound, accuracy_step, rmse_bound;
  double tx_gain = 0.0, rx_gain = 0.0, sensitivity = dataset::kSensitivity;
  std::optional<double> reference_power;
  double rx_height = 1.5;
  bool snap_to_roads = false;
};

void add_map_flags(CLI::App* c, Flags& f) {
  c->add_option("--map", f.map, "environment map (GeoJSON layers)")->required()->check(CLI::ExistingFile);
  c->add_option("--terrain", f.terrain, "terrain class of the map")
      ->required()
      ->check(CLI::IsMember({"flat", "hilly"}));
}

void add_campaign_flags(CLI::App* c, Flags& f) {
  c->add_option("--measurements", f.measurements, "measurement log (CSV)")->required()->check(CLI::ExistingFile);
  c->add_option("--tx", f.tx, "concentrator position lat,lon,mast_height")->required();
  c->add_option("--tx-power", f.tx_power, "concentrator transmit power, dBm (21, 24, 27 or 30)");
  c->add_option("--area", f.area, "area tag town/district");
  c->add_option("--rx-height", f.rx_height, "receiver antenna height above ground, m");
  c->add_flag("--snap-to-roads", f.snap_to_roads, "project GPS fixes onto road centerlines");
}

void add_training_flags(CLI::App* c, Flags& f) {
  c->add_option("--cls-c", f.cls_c, "classification C exponents lo:hi (default -8:10)");
  c->add_option("--cls-gamma", f.cls_gamma, "classification gamma exponents lo:hi (default -8:6)");
  c->add_option("--reg-c", f.reg_c, "regression C exponents lo:hi (default -3:10)");
  c->add_option("--reg-gamma", f.reg_gamma, "regression gamma exponents lo:hi (default -8:3)");
  c->add_option("--grid-step", f.grid_step, "exponent step of both grids")->check(CLI::PositiveNumber);
  c->add_option("--folds", f.folds, "cross-validation folds")->check(CLI::Range(2, 100));
  c->add_option("--epsilon", f.epsilon, "regression tube half-width, dB");
  c->add_option("--accuracy-bound", f.accuracy_bound, "initial accuracy bound, percent (default 75 flat, 90 hilly)");
  c->add_option("--accuracy-step", f.accuracy_step, "accuracy bound relaxation step, percent (default 5)");
  c->add_option("--rmse-bound", f.rmse_bound, "initial RMSE bound, dB (default 8)");
}

void add_budget_flags(CLI::App* c, Flags& f) {
  c->add_option("--tx-gain", f.tx_gain, "transmit antenna gain, dBi");
  c->add_option("--rx-gain", f.rx_gain, "receive antenna gain, dBi");
  c->add_option("--sensitivity", f.sensitivity, "receiver sensitivity, dBm");
  c->add_option("--reference-power", f.reference_power, "training transmit power, dBm (default from the model)");
}

void add_common_flags(CLI::App* c, Flags& f, bool output = true) {
  c->add_option("--seed", f.seed, "random seed");
  c->add_option("--workers", f.workers, "worker threads (default SVMPLAN_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  if (output) c->add_option("--out", f.out, "output directory");
}

geodata::TerrainClass terrain_of(const Flags& f) { return geodata::terrain_class_from_string(f.terrain); }

TrainOptions train_options(const Flags& f, geodata::TerrainClass terrain) {
  TrainOptions o;
  auto apply = [&](const std::string& s, const char* flag, int& lo, int& hi) {
    if (!s.empty()) std::tie(lo, hi) = parse_range(s, flag);
  };
  apply(f.cls_c, "--cls-c", o.cls_grid.c_min, o.cls_grid.c_max);
  apply(f.cls_gamma, "--cls-gamma", o.cls_grid.gamma_min, o.cls_grid.gamma_max);
  apply(f.reg_c, "--reg-c", o.reg_grid.c_min, o.reg_grid.c_max);
  apply(f.reg_gamma, "--reg-gamma", o.reg_grid.gamma_min, o.reg_grid.gamma_max);
  o.cls_grid.step = o.reg_grid.step = f.grid_step;
  o.folds = f.folds;
  o.epsilon = f.epsilon;
  o.workers = f.workers;
  if (f.accuracy_bound || f.accuracy_step) {
    auto b = tuning::BoundPolicy::accuracy(terrain);
    if (f.accuracy_bound) b.initial = *f.accuracy_bound;
    if (f.accuracy_step) b.accuracy_step = *f.accuracy_step;
    o.accuracy_bound = b;
  }
  if (f.rmse_bound) o.rmse_bound = tuning::BoundPolicy::rmse(*f.rmse_bound);
  o.samples.rx_height = f.rx_height;
  o.samples.snap_to_roads = f.snap_to_roads;
  o.samples.workers = f.workers;
  return o;
}

json grid_json(const tuning::GridSpec& g) {
  return {{"c", {g.c_min, g.c_max}}, {"gamma", {g.gamma_min, g.gamma_max}}, {"step", g.step}, {"base", g.base}};
}

json training_json(const TrainOptions& o) {
  json j{{"cls_grid", grid_json(o.cls_grid)},
         {"reg_grid", grid_json(o.reg_grid)},
         {"folds", o.folds},
         {"epsilon", o.epsilon},
         {"train_fraction", o.train_fraction},
         {"rmse_bound", o.rmse_bound.initial},
         {"rx_height", o.samples.rx_height},
         {"snap_to_roads", o.samples.snap_to_roads}};
  if (o.accuracy_bound) j["accuracy_bound"] = {o.accuracy_bound->initial, o.accuracy_bound->accuracy_step};
  return j;
}

LinkBudget link_budget(const Flags& f, double model_reference) {
  return {f.tx_gain, f.rx_gain, f.sensitivity, f.reference_power.value_or(model_reference)};
}

json budget_json(const LinkBudget& b) {
  return {{"tx_gain", b.tx_gain},
          {"rx_gain", b.rx_gain},
          {"sensitivity", b.sensitivity},
          {"reference_tx_power", b.reference_tx_power}};
}

/// One command run: its canonical configuration, provenance and the files
/// it writes. Outputs never overwrite an input.
class Run {
public:
  Run(std::string command, const Flags& f) : command_(std::move(command)), out_(f.out), seed_(f.seed) {
    config_["command"] = command_;
    config_["seed"] = f.seed;
  }

  json& config() { return config_; }

  void input(const std::string& key, const fs::path& p) {
    config_["inputs"][key] = {{"path", p.string()}, {"crc32", file_crc(p)}};
    inputs_.push_back(fs::weakly_canonical(p));
  }

  /// Freezes the configuration; call once every config entry is in.
  const Provenance& seal() {
    prov_ = {command_, config_hash(config_), seed_};
    return prov_;
  }
  const Provenance& prov() const { return prov_; }

  void write(const std::string& name, const std::string& text) {
    const fs::path p = out_ / name;
    const auto canon = fs::weakly_canonical(p);
    for (const auto& in : inputs_)
      if (canon == in) throw InvalidArgument("refusing to overwrite input file " + in.string());
    write_text(p, text);
    outputs_.push_back(name);
  }

  void finish(const std::string& model_crc) {
    write("manifest.json", manifest(prov_, config_, model_crc, outputs_).dump(2) + "\n");
  }

private:
  std::string command_;
  fs::path out_;
  std::uint64_t seed_;
  json config_;
  Provenance prov_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
};

/// Layer label reduced to characters safe in a file name.
std::string file_stem(const std::string& label) {
  std::string out = label;
  for (auto& ch : out)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return out.empty() ? "layer" : out;
}

std::string with_header(const Provenance& p, const std::string& text) { return "# svmplan " + p.line() + "\n" + text; }

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string split_csv(const dataset::SplitDataset& s, const Provenance& p) {
  std::ostringstream os;
  os << "# svmplan " << p.line() << "\nset,lat,lon,rssi,label,area\n";
  auto rows = [&](const std::vector<dataset::LabeledSample>& v, const char* set) {
    for (const auto& x : v)
      os << set << ',' << csv_number(x.position.latitude) << ',' << csv_number(x.position.longitude) << ','
         << csv_number(x.rssi) << ',' << x.label << ',' << x.source_area << '\n';
  };
  rows(s.train_cls, "train");
  rows(s.test_cls, "test");
  return os.str();
}

json report_json(const Provenance& p, const std::string& area, Mode mode, const EvaluationReport& r,
                 const std::vector<std::string>& warnings) {
  json j{{"command", p.command},
         {"config_hash", p.config_hash},
         {"seed", p.seed},
         {"area", area},
         {"mode", mode_label(mode)},
         {"accuracy", r.accuracy},
         {"false_positive_pct", r.false_positive_pct},
         {"n_test", r.n_test},
         {"n_correct", r.n_correct},
         {"n_false_positive", r.n_false_positive},
         {"n_full_scale", r.n_full_scale},
         {"n_regression", r.n_regression},
         {"warnings", warnings}};
  j["rmse"] = r.rmse ? json(*r.rmse) : json(nullptr);
  j["full_scale_accuracy"] = r.full_scale_accuracy ? json(*r.full_scale_accuracy) : json(nullptr);
  return j;
}

void print_summary(const std::string& area, Mode mode, const EvaluationReport& r) {
  std::cout << table_header() << render_row(area, mode, r) << '\n';
}

svm::TrainedModels stamped(svm::TrainedModels m, const Provenance& p) {
  m.provenance = p.line();
  return m;
}

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return (q.is_absolute() ? q : base / q).string();
}

/// Donor campaign file:
///   {"map": path, "terrain": "flat"|"hilly", "measurements": path,
///    "tx": {"lat", "lon", "mast_height"}, "tx_power": 21, "area": "town/district"}
/// Relative paths are resolved against the campaign file's directory.
struct LoadedCampaigns {
  std::vector<std::unique_ptr<geodata::EnvironmentMap>> maps;
  std::vector<Campaign> campaigns;
};

LoadedCampaigns load_campaigns(Run& run, const std::vector<std::string>& files) {
  LoadedCampaigns out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const fs::path file(files[i]);
    const std::string tag = "campaign" + std::to_string(i);
    run.input(tag, file);
    json j;
    try {
      j = json::parse(read_bytes(file));
    } catch (const json::exception& e) {
      throw ParseError("campaign file " + file.string() + ": " + e.what());
    }
    try {
      const auto base = file.parent_path();
      const auto map_path = resolve(base, j.at("map").get<std::string>());
      const auto meas_path = resolve(base, j.at("measurements").get<std::string>());
      run.input(tag + ".map", map_path);
      run.input(tag + ".measurements", meas_path);
      out.maps.push_back(std::make_unique<geodata::EnvironmentMap>(
          geodata::load_map(map_path, geodata::terrain_class_from_string(j.at("terrain").get<std::string>()))));
      Campaign c;
      c.map = out.maps.back().get();
      const auto& t = j.at("tx");
      c.tx = {{{t.at("lat").get<double>(), t.at("lon").get<double>(), std::nullopt}, t.value("mast_height", 0.0)},
              j.value("tx_power", 21.0),
              j.value("label", std::string("tx"))};
      c.measurements = dataset::load_measurements(meas_path);
      c.area = j.at("area").get<std::string>();
      out.campaigns.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw SchemaError("campaign file " + file.string() + ": " + e.what());
    }
  }
  return out;
}

int cmd_validate(const Flags& f) {
  Run run("validate", f);
  run.input("map", f.map);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  json summary = map_meta(map);
  std::vector<std::string> warnings;
  if (!f.measurements.empty()) {
    run.input("measurements", f.measurements);
    const auto m = dataset::load_measurements(f.measurements, &warnings);
    std::size_t covered = 0;
    for (const auto& x : m) covered += x.rssi >= dataset::kSensitivity;
    summary["measurements"] = {{"rows", m.size()}, {"covered", covered}, {"uncovered", m.size() - covered}};
  }
  std::string model_crc;
  if (!f.model.empty()) {
    run.input("model", f.model);
    const auto models = svm::load_model(f.model);
    svm::require_terrain(models, map.terrain_class());
    model_crc = file_crc(f.model);
    summary["model"] = {{"training_areas", models.training_areas},
                        {"reference_tx_power", models.reference_tx_power},
                        {"strategy", models.strategy}};
  }
  const auto& prov = run.seal();
  summary["warnings"] = warnings;
  summary["provenance"] = prov.line();
  run.write("validation.json", summary.dump(2) + "\n");
  run.finish(model_crc);
  std::cout << "valid: " << map.buildings().size() << " buildings, " << map.contours().size() << " contours, "
            << map.roads().size() << " roads";
  if (summary.contains("measurements")) std::cout << ", " << summary["measurements"]["rows"] << " measurements";
  std::cout << '\n';
  for (const auto& w : warnings) std::cout << "warning: " << w << '\n';
  return 0;
}

int cmd_features(const Flags& f) {
  Run run("features", f);
  run.input("map", f.map);
  run.input("measurements", f.measurements);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  const auto tx = parse_antenna(f.tx);
  const auto opt = train_options(f, map.terrain_class());
  run.config()["tx"] = f.tx;
  run.config()["area"] = f.area;
  run.config()["rx_height"] = f.rx_height;
  run.config()["snap_to_roads"] = f.snap_to_roads;
  const auto& prov = run.seal();
  const auto samples = dataset::make_samples(map, tx, dataset::load_measurements(f.measurements), f.area, opt.samples);
  std::ostringstream os;
  os << "# svmplan " << prov.line() << '\n';
  for (auto n : features::feature_names(map.terrain_class())) os << n << ',';
  os << "rssi,label,lat,lon\n";
  for (const auto& s : samples) {
    for (double v : s.features) os << csv_number(v) << ',';
    os << csv_number(s.rssi) << ',' << s.label << ',' << csv_number(s.position.latitude) << ','
       << csv_number(s.position.longitude) << '\n';
  }
  run.write("features.csv", os.str());
  run.finish("");
  std::cout << samples.size() << " feature vectors written to " << (fs::path(f.out) / "features.csv").string() << '\n';
  return 0;
}

void write_training(Run& run, const TrainingResult& t) {
  const auto& prov = run.prov();
  const std::string model = svm::serialize_models(stamped(t.models, prov));
  run.write("model.svm", model);
  run.write("tuning.txt", with_header(prov, t.tuning.report()));
  run.write("split.csv", split_csv(t.split, prov));
}

int cmd_train(const Flags& f) {
  Run run("train", f);
  const auto loaded = load_campaigns(run, f.campaigns);
  const auto terrain = loaded.campaigns.front().map->terrain_class();
  const auto opt = train_options(f, terrain);
  const auto strategy = f.strategy == "best" ? Strategy::Best : Strategy::Bounded;
  run.config()["strategy"] = f.strategy;
  run.config()["training"] = training_json(opt);
  const auto& prov = run.seal();
  const auto t = train_donor_models(loaded.campaigns, f.seed, opt, strategy);
  write_training(run, t);
  run.finish(hex8(svm::crc32_of(svm::serialize_models(stamped(t.models, prov)))));
  std::cout << "classification " << t.tuning.cls.cell.c << " C, " << t.tuning.cls.cell.gamma << " gamma, score "
            << t.tuning.cls.score << "\nregression " << t.tuning.reg.cell.c << " C, " << t.tuning.reg.cell.gamma
            << " gamma, score " << t.tuning.reg.score << '\n';
  return 0;
}

int cmd_pm1(const Flags& f) {
  Run run("pm1", f);
  run.input("map", f.map);
  run.input("measurements", f.measurements);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  const Concentrator tx{parse_antenna(f.tx), f.tx_power, "tx"};
  const auto opt = train_options(f, map.terrain_class());
  const auto budget = link_budget(f, f.tx_power);
  run.config()["tx"] = f.tx;
  run.config()["tx_power"] = f.tx_power;
  run.config()["area"] = f.area;
  run.config()["training"] = training_json(opt);
  run.config()["budget"] = budget_json(budget);
  const auto& prov = run.seal();
  const auto r = run_pm1(map, dataset::load_measurements(f.measurements), tx, budget, f.area, f.seed, opt);
  write_training(run, r.training);
  run.write("report.txt", render_evaluation(prov, f.area, Mode::PM1, r.report, r.warnings));
  run.write("report.json", report_json(prov, f.area, Mode::PM1, r.report, r.warnings).dump(2) + "\n");
  run.finish(hex8(svm::crc32_of(svm::serialize_models(stamped(r.training.models, prov)))));
  print_summary(f.area, Mode::PM1, r.report);
  return 0;
}

int cmd_pm2(const Flags& f) {
  Run run("pm2", f);
  run.input("map", f.map);
  run.input("model", f.model);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  const auto models = svm::load_model(f.model);
  svm::require_terrain(models, map.terrain_class());
  std::vector<Concentrator> cs;
  for (const auto& s : f.concentrators) cs.push_back(parse_concentrator(s, cs.size()));
  const LatticeSpec lattice{parse_corner(f.corner_a, "--corner-a"), parse_corner(f.corner_b, "--corner-b"), f.step,
                            f.step};
  if (!(f.step > 0.0)) throw InvalidArgument("--step must be positive");
  const auto budget = link_budget(f, models.reference_tx_power);
  Pm2Options po;
  po.rx_height = f.rx_height;
  po.workers = f.workers;
  run.config()["concentrators"] = f.concentrators;
  run.config()["lattice"] = {{"corner_a", f.corner_a}, {"corner_b", f.corner_b}, {"step", f.step}};
  run.config()["budget"] = budget_json(budget);
  run.config()["rx_height"] = f.rx_height;
  const auto& prov = run.seal();
  const auto raster = run_pm2(map, cs, budget, models, lattice, po);
  auto j = raster_to_json(map, raster);
  j["provenance"] = {{"command", prov.command}, {"config_hash", prov.config_hash}, {"seed", prov.seed}};
  run.write("raster.json", j.dump() + "\n");
  for (std::size_t k = 0; k < raster.layers.size(); ++k)
    run.write("rss_" + file_stem(raster.layers[k].label) + ".ppm", render_ppm(raster, RasterView::Rss, k, prov));
  run.write("best_server.ppm", render_ppm(raster, RasterView::BestServer, 0, prov));
  run.write("raster.georef", render_georef(map, raster, prov));
  run.write("coverage.geojson", coverage_geojson(map, raster, prov).dump() + "\n");
  run.write("budget_coverage.geojson", coverage_geojson(map, raster, prov, true).dump() + "\n");
  run.finish(file_crc(f.model));
  std::cout << raster.rows() << " x " << raster.cols() << " lattice, " << raster.layers.size()
            << " concentrator(s)\n";
  for (const auto& w : budget.warnings()) std::cout << "warning: " << w << '\n';
  if (budget.reference_tx_power != models.reference_tx_power)
    std::cout << "warning: link budget reference power differs from the models' training power\n";
  return 0;
}

int cmd_pm3(const Flags& f) {
  Run run("pm3", f);
  run.input("map", f.map);
  run.input("measurements", f.measurements);
  run.input("model", f.model);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  const auto models = svm::load_model(f.model);
  const Concentrator tx{parse_antenna(f.tx), f.tx_power, "tx"};
  const auto variant = parse_variant(f.variant);
  const auto budget = link_budget(f, models.reference_tx_power);
  auto opt = train_options(f, map.terrain_class());
  run.config()["tx"] = f.tx;
  run.config()["tx_power"] = f.tx_power;
  run.config()["area"] = f.area;
  run.config()["variant"] = mode_label(variant);
  run.config()["budget"] = budget_json(budget);
  run.config()["rx_height"] = f.rx_height;
  run.config()["snap_to_roads"] = f.snap_to_roads;
  const auto& prov = run.seal();
  const auto r = run_pm3(map, dataset::load_measurements(f.measurements), tx, budget, models, variant, f.area, opt);
  const std::vector<std::string> notes{"power adjustment: additive, predicted RSS + (tx_power - reference_tx_power)"};
  run.write("report.txt", render_evaluation(prov, f.area, variant, r.report, r.warnings, notes));
  run.write("report.json", report_json(prov, f.area, variant, r.report, r.warnings).dump(2) + "\n");
  run.finish(file_crc(f.model));
  print_summary(f.area, variant, r.report);
  return 0;
}

int cmd_serve(const Flags& f) {
  const auto map = geodata::load_map(f.map, terrain_of(f));
  const auto models = svm::load_model(f.model);
  Pm2Options po;
  po.rx_height = f.rx_height;
  po.workers = f.workers;
  PlannerService service(map, models, link_budget(f, models.reference_tx_power), po);
  const int port = service.bind(f.host, f.port);
  std::cout << "listening on http://" << f.host << ':' << port << std::endl;
  return service.listen() ? 0 : kExitFailure;
}

int cmd_export(const Flags& f) {
  Run run("export", f);
  run.input("map", f.map);
  run.input("raster", f.raster);
  const auto map = geodata::load_map(f.map, terrain_of(f));
  json j;
  try {
    j = json::parse(read_bytes(f.raster));
  } catch (const json::exception& e) {
    throw ParseError("raster file " + f.raster + ": " + e.what());
  }
  const auto raster = raster_from_json(map, j);
  const auto& prov = run.seal();
  for (std::size_t k = 0; k < raster.layers.size(); ++k)
    run.write("rss_" + file_stem(raster.layers[k].label) + ".ppm", render_ppm(raster, RasterView::Rss, k, prov));
  run.write("best_server.ppm", render_ppm(raster, RasterView::BestServer, 0, prov));
  run.write("raster.georef", render_georef(map, raster, prov));
  run.write("coverage.geojson", coverage_geojson(map, raster, prov).dump() + "\n");
  run.write("budget_coverage.geojson", coverage_geojson(map, raster, prov, true).dump() + "\n");
  run.finish("");
  std::cout << "exported " << raster.layers.size() << " layer(s)\n";
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"svmplan: SVM-based coverage planning for smart-metering concentrators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags f;

  auto* validate = app.add_subcommand("validate", "load and check a map, and optionally a log and a model");
  add_map_flags(validate, f);
  validate->add_option("--measurements", f.measurements, "measurement log (CSV)")->check(CLI::ExistingFile);
  validate->add_option("--model", f.model, "model file")->check(CLI::ExistingFile);
  add_common_flags(validate, f);

  auto* feats = app.add_subcommand("features", "dump the feature vector of every measurement");
  add_map_flags(feats, f);
  add_campaign_flags(feats, f);
  add_common_flags(feats, f);

  auto* train = app.add_subcommand("train", "tune and train models on donor campaigns");
  train->add_option("--campaign", f.campaigns, "donor campaign file (JSON), repeatable")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--strategy", f.strategy, "grid-search strategy")->check(CLI::IsMember({"best", "bounded"}));
  add_training_flags(train, f);
  add_common_flags(train, f);

  auto* pm1 = app.add_subcommand("pm1", "local training and evaluation on one campaign");
  add_map_flags(pm1, f);
  add_campaign_flags(pm1, f);
  add_training_flags(pm1, f);
  add_budget_flags(pm1, f);
  add_common_flags(pm1, f);

  auto* pm2 = app.add_subcommand("pm2", "blind coverage raster for candidate concentrators");
  add_map_flags(pm2, f);
  pm2->add_option("--model", f.model, "model file")->required()->check(CLI::ExistingFile);
  pm2->add_option("--concentrator", f.concentrators, "lat,lon,mast_height,tx_power[,label], repeatable")
      ->required();
  pm2->add_option("--corner-a", f.corner_a, "lattice corner lat,lon")->required();
  pm2->add_option("--corner-b", f.corner_b, "opposite lattice corner lat,lon")->required();
  pm2->add_option("--step", f.step, "lattice step, m");
  pm2->add_option("--rx-height", f.rx_height, "receiver antenna height above ground, m");
  add_budget_flags(pm2, f);
  add_common_flags(pm2, f);

  auto* pm3 = app.add_subcommand("pm3", "blind evaluation of donor models against local measurements");
  add_map_flags(pm3, f);
  add_campaign_flags(pm3, f);
  pm3->add_option("--model", f.model, "model file")->required()->check(CLI::ExistingFile);
  pm3->add_option("--variant", f.variant, "3 (different town) or 3' (same town, other district)");
  add_budget_flags(pm3, f);
  add_common_flags(pm3, f);

  auto* serve = app.add_subcommand("serve", "run the HTTP planning API");
  add_map_flags(serve, f);
  serve->add_option("--model", f.model, "model file")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", f.host, "listen address");
  serve->add_option("--port", f.port, "listen port, 0 picks a free one")->check(CLI::Range(0, 65535));
  serve->add_option("--rx-height", f.rx_height, "receiver antenna height above ground, m");
  add_budget_flags(serve, f);
  add_common_flags(serve, f, false);

  auto* exp = app.add_subcommand("export", "re-render images and vectors from a saved raster.json");
  add_map_flags(exp, f);
  exp->add_option("--raster", f.raster, "raster.json written by pm2")->required()->check(CLI::ExistingFile);
  add_common_flags(exp, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(f);
    if (*feats) return cmd_features(f);
    if (*train) return cmd_train(f);
    if (*pm1) return cmd_pm1(f);
    if (*pm2) return cmd_pm2(f);
    if (*pm3) return cmd_pm3(f);
    if (*serve) return cmd_serve(f);
    if (*exp) return cmd_export(f);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
