#ifndef SVMPLAN_PLANNER_MODES_HPP
#define SVMPLAN_PLANNER_MODES_HPP

#include <optional>
#include <string>
#include <vector>

#include "svmplan/dataset.hpp"
#include "svmplan/planner/budget.hpp"
#include "svmplan/planner/metrics.hpp"
#include "svmplan/svm/model_io.hpp"
#include "svmplan/tuning.hpp"

namespace svmplan::planner {

using dataset::LabeledSample;
using features::FeatureVector;
using svm::TrainedModels;

/// Scaled decision and regression for one feature vector.
struct Predictor {
  const TrainedModels& models;

  int decide(const FeatureVector& raw) const { return models.svc.decide(models.scaler.apply(raw)); }
  double predict(const FeatureVector& raw) const { return models.svr.predict(models.scaler.apply(raw)); }
};

struct TrainOptions {
  tuning::GridSpec cls_grid = tuning::GridSpec::classification();
  tuning::GridSpec reg_grid = tuning::GridSpec::regression();
  std::size_t folds = 5;
  double epsilon = 3.0;
  double train_fraction = 0.8;
  svm::SolverOptions solver;
  unsigned workers = 1;
  std::optional<tuning::BoundPolicy> accuracy_bound; // default follows the terrain class
  tuning::BoundPolicy rmse_bound = tuning::BoundPolicy::rmse();
  dataset::SampleOptions samples;
};

struct TuningOutcome {
  tuning::CellScore cls;
  tuning::CellScore reg;
  std::vector<tuning::CellScore> cls_table;
  std::vector<tuning::CellScore> reg_table;
  std::vector<double> cls_trajectory; // empty for the best strategy
  std::vector<double> reg_trajectory;
  std::string scoring; // what the cell scores were measured on

  std::string report() const {
    return tuning::render_tuning_report("classification (" + scoring + ")", cls_table, cls, cls_trajectory) +
           tuning::render_tuning_report("regression (" + scoring + ")", reg_table, reg, reg_trajectory);
  }
};

struct TrainingResult {
  TrainedModels models;
  TuningOutcome tuning;
  dataset::SplitDataset split;
};

enum class Strategy { Best, Bounded };

namespace detail {

struct ScaledSets {
  std::vector<FeatureVector> x_cls;
  std::vector<int> z;
  std::vector<FeatureVector> x_reg;
  std::vector<double> t;
};

inline ScaledSets scaled(const svm::Scaler& s, const std::vector<LabeledSample>& cls,
                         const std::vector<LabeledSample>& reg) {
  ScaledSets out;
  for (const auto& x : cls) {
    out.x_cls.push_back(s.apply(x.features));
    out.z.push_back(x.label);
  }
  for (const auto& x : reg) {
    out.x_reg.push_back(s.apply(x.features));
    out.t.push_back(x.rssi);
  }
  return out;
}

inline void require_both_classes(const std::vector<LabeledSample>& s, const char* what) {
  const auto pos = std::count_if(s.begin(), s.end(), [](const LabeledSample& x) { return x.label == +1; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(s.size()))
    throw SingleClassData(std::string(what) + ": every sample has the same coverage label");
}

} // namespace detail

/// Scales, tunes and trains both models on an existing split.
/// Best: k-fold cross-validation on the training sets picks the optimum.
/// Bounded: each cell trains on the training sets and is scored on the
/// held-out test sets; the smallest qualifying gamma wins.
inline TrainingResult train_models(const dataset::SplitDataset& split, geodata::TerrainClass terrain,
                                   std::vector<std::string> areas, double reference_tx_power, std::uint64_t seed,
                                   Strategy strategy, const TrainOptions& opt = {}) {
  detail::require_both_classes(split.train_cls, "training set");
  if (split.train_reg.size() < 2) throw InsufficientData("fewer than 2 covered samples to train the regressor");
  std::vector<FeatureVector> raw;
  for (const auto& s : split.train_cls) raw.push_back(s.features);

  TrainingResult r;
  r.split = split;
  auto& m = r.models;
  m.terrain = terrain;
  m.training_areas = std::move(areas);
  m.reference_tx_power = reference_tx_power;
  m.seed = seed;
  m.scaler = svm::fit_scaler(raw);
  const auto train = detail::scaled(m.scaler, split.train_cls, split.train_reg);
  auto& t = r.tuning;

  if (strategy == Strategy::Best) {
    m.strategy = "best";
    t.scoring = std::to_string(opt.folds) + "-fold cross-validation on the training set";
    const auto cls = tuning::grid_search_best(
        opt.cls_grid, tuning::Objective::MaximizeAccuracy,
        [&](const tuning::Cell& c) { return tuning::cross_validate_csvc(train.x_cls, train.z, c, opt.folds, seed, opt.solver); },
        opt.workers);
    const auto reg = tuning::grid_search_best(
        opt.reg_grid, tuning::Objective::MinimizeRmse,
        [&](const tuning::Cell& c) {
          return tuning::cross_validate_esvr(train.x_reg, train.t, c, opt.epsilon, opt.folds, seed, opt.solver);
        },
        opt.workers);
    t.cls = cls.selected;
    t.cls_table = cls.table;
    t.reg = reg.selected;
    t.reg_table = reg.table;
  } else {
    m.strategy = "bounded";
    t.scoring = "donor held-out test sets";
    detail::require_both_classes(split.test_cls, "donor test set");
    if (split.test_reg.empty()) throw InsufficientData("donor test set has no covered samples");
    const auto test = detail::scaled(m.scaler, split.test_cls, split.test_reg);
    const auto acc_policy = opt.accuracy_bound.value_or(tuning::BoundPolicy::accuracy(terrain));
    const auto cls = tuning::grid_search_bounded(
        opt.cls_grid, acc_policy,
        [&](const tuning::Cell& c) {
          const auto svc = svm::train_csvc(train.x_cls, train.z, c.c, {c.gamma}, opt.solver);
          std::size_t ok = 0;
          for (std::size_t i = 0; i < test.x_cls.size(); ++i) ok += svc.decide(test.x_cls[i]) == test.z[i];
          return 100.0 * static_cast<double>(ok) / static_cast<double>(test.x_cls.size());
        },
        opt.workers);
    const auto reg = tuning::grid_search_bounded(
        opt.reg_grid, opt.rmse_bound,
        [&](const tuning::Cell& c) {
          const auto svr = svm::train_esvr(train.x_reg, train.t, c.c, {c.gamma}, opt.epsilon, opt.solver);
          std::vector<double> pred;
          for (const auto& x : test.x_reg) pred.push_back(svr.predict(x));
          return rmse(pred, test.t);
        },
        opt.workers);
    t.cls = cls.selected;
    t.cls_table = cls.table;
    t.cls_trajectory = cls.trajectory;
    t.reg = reg.selected;
    t.reg_table = reg.table;
    t.reg_trajectory = reg.trajectory;
  }
  m.svc = svm::train_csvc(train.x_cls, train.z, t.cls.cell.c, {t.cls.cell.gamma}, opt.solver);
  m.svr = svm::train_esvr(train.x_reg, train.t, t.reg.cell.c, {t.reg.cell.gamma}, opt.epsilon, opt.solver);
  return r;
}

/// Decisions on `cls`, regression errors on `reg` (predictions shifted by
/// the transmit-power delta).
inline EvaluationReport evaluate(const TrainedModels& models, const std::vector<LabeledSample>& cls,
                                 const std::vector<LabeledSample>& reg, double power_delta = 0.0) {
  const Predictor p{models};
  std::vector<int> decisions, labels;
  std::vector<double> rssi, predicted, actual;
  for (const auto& s : cls) {
    decisions.push_back(p.decide(s.features));
    labels.push_back(s.label);
    rssi.push_back(s.rssi);
  }
  for (const auto& s : reg) {
    predicted.push_back(p.predict(s.features) + power_delta);
    actual.push_back(s.rssi);
  }
  return compute_metrics(decisions, labels, rssi, predicted, actual);
}

struct Pm1Result {
  TrainingResult training;
  EvaluationReport report;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinPm1Measurements = 100;

/// Local train/test on one campaign: features, split, best-strategy tuning,
/// training, then A over the classification test set and RMSE over the
/// covered test samples.
inline Pm1Result run_pm1(const geodata::EnvironmentMap& map, const std::vector<dataset::Measurement>& measurements,
                         const Concentrator& tx, const LinkBudget& budget, const std::string& area, std::uint64_t seed,
                         const TrainOptions& opt = {}) {
  require_valid(tx);
  if (measurements.size() < kMinPm1Measurements)
    throw InsufficientData("PM1 needs at least " + std::to_string(kMinPm1Measurements) + " measurements, got " +
                           std::to_string(measurements.size()));
  auto samples = dataset::make_samples(map, tx.antenna, measurements, area, opt.samples);
  detail::require_both_classes(samples, "measurements");
  Pm1Result r;
  r.warnings = budget.warnings();
  if (auto w = dataset::balance_warning(samples)) r.warnings.push_back(*w);
  const auto split = dataset::permute_and_split(std::move(samples), seed, opt.train_fraction);
  r.training = train_models(split, map.terrain_class(), {area}, tx.tx_power, seed, Strategy::Best, opt);
  r.report = evaluate(r.training.models, split.test_cls, split.test_reg);
  return r;
}

/// One donor campaign for blind-prediction models.
struct Campaign {
  const geodata::EnvironmentMap* map = nullptr;
  Concentrator tx;
  std::vector<dataset::Measurement> measurements;
  std::string area; // "town/district"
};

/// Models from one or more donor campaigns of the same terrain class and
/// transmit power; blind prediction uses the bounded strategy.
inline TrainingResult train_donor_models(const std::vector<Campaign>& donors, std::uint64_t seed,
                                         const TrainOptions& opt = {}, Strategy strategy = Strategy::Bounded) {
  if (donors.empty()) throw InvalidArgument("no donor campaigns");
  std::vector<LabeledSample> samples;
  std::vector<std::string> areas;
  for (const auto& d : donors) {
    if (!d.map) throw InvalidArgument("donor campaign '" + d.area + "' has no map");
    require_valid(d.tx);
    if (d.map->terrain_class() != donors.front().map->terrain_class())
      throw TerrainClassMismatch("donor campaigns mix flat and hilly terrain");
    if (d.tx.tx_power != donors.front().tx.tx_power)
      throw InvalidArgument("donor campaigns were acquired at different transmit powers");
    auto s = dataset::make_samples(*d.map, d.tx.antenna, d.measurements, d.area, opt.samples);
    samples.insert(samples.end(), s.begin(), s.end());
    if (std::find(areas.begin(), areas.end(), d.area) == areas.end()) areas.push_back(d.area);
  }
  const auto split = dataset::permute_and_split(std::move(samples), seed, opt.train_fraction);
  return train_models(split, donors.front().map->terrain_class(), areas, donors.front().tx.tx_power, seed,
                      strategy, opt);
}

inline std::string town_of(const std::string& area) { return area.substr(0, area.find('/')); }

/// PM3 forbids any training tag from the target town; PM3' forbids only the
/// target district itself.
inline void require_no_leakage(const TrainedModels& models, const std::string& target_area, Mode variant) {
  if (variant != Mode::PM3 && variant != Mode::PM3Prime) throw InvalidArgument("leakage check applies to PM3 and PM3'");
  for (const auto& a : models.training_areas) {
    if (a == target_area)
      throw LeakageError("target area '" + target_area + "' appears in the models' training areas");
    if (variant == Mode::PM3 && town_of(a) == town_of(target_area))
      throw LeakageError("models were trained on '" + a + "', in the same town as target '" + target_area +
                         "'; PM3 needs a different town (use PM3' for other districts)");
  }
}

struct Pm3Result {
  EvaluationReport report;
  std::vector<LabeledSample> samples;
  std::vector<int> decisions;                // aligned with samples
  std::vector<std::size_t> regression_set;   // indices: covered and decided +1
  std::vector<std::string> warnings;
};

/// Blind evaluation against local measurements: every sample is classified,
/// regression is scored on covered samples the classifier also accepts.
inline Pm3Result run_pm3(const geodata::EnvironmentMap& map, const std::vector<dataset::Measurement>& measurements,
                         const Concentrator& tx, const LinkBudget& budget, const TrainedModels& models,
                         Mode variant, const std::string& target_area, const TrainOptions& opt = {}) {
  require_valid(tx);
  require_no_leakage(models, target_area, variant);
  svm::require_terrain(models, map.terrain_class());
  Pm3Result r;
  r.warnings = budget.warnings();
  if (budget.reference_tx_power != models.reference_tx_power)
    r.warnings.push_back("link budget reference power differs from the models' training power");
  r.samples = dataset::make_samples(map, tx.antenna, measurements, target_area, opt.samples);
  if (r.samples.empty()) throw InsufficientData("no measurements to evaluate");
  const Predictor p{models};
  std::vector<LabeledSample> reg;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    r.decisions.push_back(p.decide(r.samples[i].features));
    if (r.samples[i].label == +1 && r.decisions.back() == +1) {
      r.regression_set.push_back(i);
      reg.push_back(r.samples[i]);
    }
  }
  r.report = evaluate(models, r.samples, reg, tx.tx_power - budget.reference_tx_power);
  return r;
}

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_MODES_HPP
