#ifndef SVMPLAN_PLANNER_METRICS_HPP
#define SVMPLAN_PLANNER_METRICS_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "svmplan/dataset.hpp"
#include "svmplan/error.hpp"

namespace svmplan::planner {

/// True for RSS values in the near-sensitivity band used by the
/// full-scale accuracy: [-119, -110] dBm, or the no-coverage reading.
inline bool in_full_scale_band(double rssi) {
  return rssi == dataset::kNoCoverageRssi || (rssi >= -119.0 && rssi <= -110.0);
}

struct EvaluationReport {
  double accuracy = 0.0;                      // percent
  std::optional<double> full_scale_accuracy;  // percent, undefined on an empty band
  double false_positive_pct = 0.0;            // percent of all test samples
  std::optional<double> rmse;                 // dB, undefined without regression samples
  std::size_t n_test = 0;
  std::size_t n_correct = 0;
  std::size_t n_false_positive = 0;
  std::size_t n_full_scale = 0;
  std::size_t n_regression = 0;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": vectors have different lengths");
}

/// Accuracy over the full-scale band; EmptySubset when no sample is in it.
inline double full_scale_accuracy(const std::vector<int>& decisions, const std::vector<int>& labels,
                                  const std::vector<double>& rssi) {
  require_aligned(decisions.size(), labels.size(), "full_scale_accuracy");
  require_aligned(decisions.size(), rssi.size(), "full_scale_accuracy");
  std::size_t n = 0, ok = 0;
  for (std::size_t i = 0; i < rssi.size(); ++i) {
    if (!in_full_scale_band(rssi[i])) continue;
    ++n;
    ok += decisions[i] == labels[i];
  }
  if (n == 0) throw EmptySubset("no test sample lies in the full-scale band");
  return 100.0 * static_cast<double>(ok) / static_cast<double>(n);
}

inline double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  require_aligned(predicted.size(), actual.size(), "rmse");
  if (predicted.empty()) throw EmptySubset("rmse over an empty set");
  double se = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) se += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  return std::sqrt(se / static_cast<double>(predicted.size()));
}

/// Classification metrics over aligned (decision, label, rssi) triples and
/// RMSE over the separate regression pairs.
inline EvaluationReport compute_metrics(const std::vector<int>& decisions, const std::vector<int>& labels,
                                        const std::vector<double>& rssi,
                                        const std::vector<double>& predicted_rss = {},
                                        const std::vector<double>& actual_rss = {}) {
  require_aligned(decisions.size(), labels.size(), "compute_metrics");
  require_aligned(decisions.size(), rssi.size(), "compute_metrics");
  if (decisions.empty()) throw EmptySubset("compute_metrics: no test samples");
  EvaluationReport r;
  r.n_test = decisions.size();
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    r.n_correct += decisions[i] == labels[i];
    r.n_false_positive += decisions[i] == +1 && labels[i] == -1;
    r.n_full_scale += in_full_scale_band(rssi[i]);
  }
  const double n = static_cast<double>(r.n_test);
  r.accuracy = 100.0 * static_cast<double>(r.n_correct) / n;
  r.false_positive_pct = 100.0 * static_cast<double>(r.n_false_positive) / n;
  if (r.n_full_scale > 0) r.full_scale_accuracy = full_scale_accuracy(decisions, labels, rssi);
  r.n_regression = predicted_rss.size();
  if (!predicted_rss.empty()) r.rmse = rmse(predicted_rss, actual_rss);
  else require_aligned(0, actual_rss.size(), "compute_metrics regression");
  return r;
}

enum class Mode { PM1, PM2, PM3, PM3Prime };

inline std::string mode_label(Mode m) {
  switch (m) {
  case Mode::PM1: return "1";
  case Mode::PM2: return "2";
  case Mode::PM3: return "3";
  case Mode::PM3Prime: return "3'";
  }
  return "?";
}

inline std::string fixed2(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline std::string table_header() {
  return "| Radio planning area | PM # | A | RMSE | A_fs | P_fp |\n|---|---|---|---|---|---|\n";
}

/// One results-table row: area, mode, A, RMSE, A_fs, P_fp with two decimals.
inline std::string render_row(const std::string& area, Mode mode, const EvaluationReport& r) {
  return "| " + area + " | " + mode_label(mode) + " | " + fixed2(r.accuracy) + " | " + fixed2(r.rmse) + " | " +
         fixed2(r.full_scale_accuracy) + " | " + fixed2(r.false_positive_pct) + " |";
}

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_METRICS_HPP
