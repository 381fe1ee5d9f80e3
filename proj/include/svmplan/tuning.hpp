#ifndef SVMPLAN_TUNING_HPP
#define SVMPLAN_TUNING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "svmplan/error.hpp"
#include "svmplan/geodata/environment_map.hpp"
#include "svmplan/parallel.hpp"
#include "svmplan/svm/models.hpp"

namespace svmplan::tuning {

struct Cell {
  int c_exp = 0;
  int gamma_exp = 0;
  double c = 1.0;
  double gamma = 1.0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Powers-of-base grid over (C, gamma); exponent ranges are inclusive.
struct GridSpec {
  int c_min = -8, c_max = 10;
  int gamma_min = -8, gamma_max = 6;
  int step = 1;
  double base = 2.0;

  static GridSpec classification() { return {-8, 10, -8, 6, 1, 2.0}; }
  static GridSpec regression() { return {-3, 10, -8, 3, 1, 2.0}; }

  /// Row-major over C exponents, then gamma exponents.
  std::vector<Cell> cells() const {
    if (step <= 0 || c_min > c_max || gamma_min > gamma_max || !(base > 1.0))
      throw InvalidArgument("grid: empty or malformed exponent range");
    std::vector<Cell> out;
    for (int ce = c_min; ce <= c_max; ce += step)
      for (int ge = gamma_min; ge <= gamma_max; ge += step)
        out.push_back({ce, ge, std::pow(base, ce), std::pow(base, ge)});
    return out;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class Objective { MaximizeAccuracy, MinimizeRmse };

struct CellScore {
  Cell cell;
  double score = 0.0;

  friend bool operator==(const CellScore&, const CellScore&) = default;
};

/// Evaluates every cell; the table is indexed like grid.cells() whatever
/// order the workers finish in.
inline std::vector<CellScore> evaluate_grid(const std::vector<Cell>& cells,
                                            const std::function<double(const Cell&)>& evaluate, unsigned workers = 1) {
  std::vector<CellScore> table(cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) { table[i] = {cells[i], evaluate(cells[i])}; });
  return table;
}

/// Strict preference between two cells with a finite score: better score,
/// then smaller gamma, then smaller C.
inline bool preferred(const CellScore& a, const CellScore& b, Objective obj) {
  if (a.score != b.score) return obj == Objective::MaximizeAccuracy ? a.score > b.score : a.score < b.score;
  if (a.cell.gamma_exp != b.cell.gamma_exp) return a.cell.gamma_exp < b.cell.gamma_exp;
  return a.cell.c_exp < b.cell.c_exp;
}

/// Tie-broken optimum of an already evaluated table; NaN scores never win.
inline CellScore select_best(const std::vector<CellScore>& table, Objective obj) {
  const CellScore* best = nullptr;
  for (const auto& cs : table) {
    if (std::isnan(cs.score)) continue;
    if (!best || preferred(cs, *best, obj)) best = &cs;
  }
  if (!best) throw InvalidArgument("grid search: no cell produced a finite score");
  return *best;
}

struct BestResult {
  CellScore selected;
  std::vector<CellScore> table;
};

inline BestResult grid_search_best(const GridSpec& grid, Objective obj,
                                   const std::function<double(const Cell&)>& evaluate, unsigned workers = 1) {
  BestResult r;
  r.table = evaluate_grid(grid.cells(), evaluate, workers);
  r.selected = select_best(r.table, obj);
  return r;
}

/// Qualification bound and its relaxation law. Accuracy bounds drop by a
/// fixed step; RMSE bounds follow RMSE_k = sqrt(RMSE_0^2 + 4k).
struct BoundPolicy {
  Objective objective = Objective::MaximizeAccuracy;
  double initial = 75.0;
  double accuracy_step = 5.0;
  double rmse_increment = 4.0; // added to the squared bound per relaxation
  int max_relaxations = 50;

  static BoundPolicy accuracy(geodata::TerrainClass terrain) {
    return {Objective::MaximizeAccuracy, terrain == geodata::TerrainClass::Flat ? 75.0 : 90.0, 5.0, 4.0, 50};
  }
  static BoundPolicy rmse(double initial = 8.0) { return {Objective::MinimizeRmse, initial, 5.0, 4.0, 50}; }

  /// Bound after k relaxations, computed in closed form.
  double bound_at(int k) const {
    if (objective == Objective::MaximizeAccuracy) return initial - accuracy_step * k;
    return std::sqrt(initial * initial + rmse_increment * k);
  }

  bool qualifies(double score, double bound) const {
    return objective == Objective::MaximizeAccuracy ? score >= bound : score <= bound;
  }
};

struct BoundedResult {
  CellScore selected;
  double final_bound = 0.0;
  int relaxations = 0;
  std::vector<double> trajectory; // every bound tried, in order
  std::vector<CellScore> table;
};

/// Smallest gamma (then smallest C) among the cells meeting the bound,
/// relaxing the bound until at least one cell qualifies.
inline BoundedResult select_bounded(const std::vector<CellScore>& table, const BoundPolicy& policy) {
  if (table.empty()) throw InvalidArgument("grid search: empty grid");
  BoundedResult r;
  for (int k = 0; k <= policy.max_relaxations; ++k) {
    const double bound = policy.bound_at(k);
    r.trajectory.push_back(bound);
    const CellScore* pick = nullptr;
    for (const auto& cs : table) {
      if (std::isnan(cs.score) || !policy.qualifies(cs.score, bound)) continue;
      if (!pick || cs.cell.gamma_exp < pick->cell.gamma_exp ||
          (cs.cell.gamma_exp == pick->cell.gamma_exp && cs.cell.c_exp < pick->cell.c_exp))
        pick = &cs;
    }
    if (pick) {
      r.selected = *pick;
      r.final_bound = bound;
      r.relaxations = k;
      r.table = table;
      return r;
    }
  }
  throw NonTermination("bounded grid search: no cell qualified after " + std::to_string(policy.max_relaxations) +
                       " relaxations");
}

inline BoundedResult grid_search_bounded(const GridSpec& grid, const BoundPolicy& policy,
                                         const std::function<double(const Cell&)>& evaluate, unsigned workers = 1) {
  return select_bounded(evaluate_grid(grid.cells(), evaluate, workers), policy);
}

using Folds = std::vector<std::vector<std::size_t>>;

/// Seeded shuffle dealt round-robin into k folds.
inline Folds plain_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("cross validation needs at least 2 folds");
  if (n < k) throw FoldDegeneracy("cannot split " + std::to_string(n) + " samples into " + std::to_string(k) + " folds");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  Folds folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Class-stratified folds; each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped so fold sizes stay balanced.
inline Folds stratified_folds(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("cross validation needs at least 2 folds");
  std::vector<std::size_t> neg, pos;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::shuffle(pos.begin(), pos.end(), rng);
  Folds folds(k);
  std::size_t next = 0;
  for (const auto* cls : {&neg, &pos})
    for (std::size_t i : *cls) folds[next++ % k].push_back(i);
  for (std::size_t f = 0; f < k; ++f) {
    bool has_pos = false, has_neg = false;
    for (std::size_t i : folds[f]) (labels[i] > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
      throw FoldDegeneracy("fold " + std::to_string(f) + " of " + std::to_string(k) + " lacks a class");
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

/// Mean over folds of score(train_indices, held_out_indices).
inline double cross_validate(const Folds& folds,
                             const std::function<double(const std::vector<std::size_t>&,
                                                        const std::vector<std::size_t>&)>& score) {
  double sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    sum += score(train, folds[f]);
  }
  return sum / static_cast<double>(folds.size());
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

/// Mean held-out accuracy (percent) of the classifier over stratified folds.
template <std::size_t Dim>
double cross_validate_csvc(const std::vector<std::array<double, Dim>>& x, const std::vector<int>& labels,
                           const Cell& cell, std::size_t k = 5, std::uint64_t seed = 0,
                           const svm::SolverOptions& opt = {}) {
  const auto folds = stratified_folds(labels, k, seed);
  return cross_validate(folds, [&](const auto& tr, const auto& te) {
    const auto model = svm::train_csvc(pick(x, tr), pick(labels, tr), cell.c, svm::KernelParams{cell.gamma}, opt);
    std::size_t correct = 0;
    for (std::size_t i : te) correct += model.decide(x[i]) == labels[i];
    return 100.0 * static_cast<double>(correct) / static_cast<double>(te.size());
  });
}

/// Mean held-out RMSE (dB) of the regressor over plain folds.
template <std::size_t Dim>
double cross_validate_esvr(const std::vector<std::array<double, Dim>>& x, const std::vector<double>& targets,
                           const Cell& cell, double epsilon = 3.0, std::size_t k = 5, std::uint64_t seed = 0,
                           const svm::SolverOptions& opt = {}) {
  const auto folds = plain_folds(x.size(), k, seed);
  return cross_validate(folds, [&](const auto& tr, const auto& te) {
    const auto model =
        svm::train_esvr(pick(x, tr), pick(targets, tr), cell.c, svm::KernelParams{cell.gamma}, epsilon, opt);
    double se = 0.0;
    for (std::size_t i : te) {
      const double e = model.predict(x[i]) - targets[i];
      se += e * e;
    }
    return std::sqrt(se / static_cast<double>(te.size()));
  });
}

/// Plain-text tuning report: every cell, the bound trajectory when present,
/// and the selected cell.
inline std::string render_tuning_report(const std::string& title, const std::vector<CellScore>& table,
                                        const CellScore& selected, const std::vector<double>& trajectory = {}) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "# " << title << "\n";
  os << "cells " << table.size() << "\n";
  os << "c_exp\tgamma_exp\tC\tgamma\tscore\n";
  for (const auto& cs : table)
    os << cs.cell.c_exp << '\t' << cs.cell.gamma_exp << '\t' << cs.cell.c << '\t' << cs.cell.gamma << '\t' << cs.score
       << '\n';
  if (!trajectory.empty()) {
    os << "bound_trajectory";
    for (double b : trajectory) os << ' ' << b;
    os << '\n';
  }
  os << "selected C=2^" << selected.cell.c_exp << " gamma=2^" << selected.cell.gamma_exp << " score=" << selected.score
     << '\n';
  return os.str();
}

} // namespace svmplan::tuning

#endif // SVMPLAN_TUNING_HPP
