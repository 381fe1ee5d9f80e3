#include <gtest/gtest.h>

#include <map>
#include <random>

#include "svmplan/tuning.hpp"

using namespace svmplan;
using namespace svmplan::tuning;

namespace {

GridSpec small_grid() { return {-2, 2, -3, 1, 1, 2.0}; }

// Planted scores keyed by (c_exp, gamma_exp); unlisted cells get `fallback`.
std::function<double(const Cell&)> planted(std::map<std::pair<int, int>, double> scores, double fallback) {
  return [scores = std::move(scores), fallback](const Cell& c) {
    const auto it = scores.find({c.c_exp, c.gamma_exp});
    return it == scores.end() ? fallback : it->second;
  };
}

} // namespace

TEST(Grid, DefaultRangesAndOrder) {
  const auto cls = GridSpec::classification().cells();
  EXPECT_EQ(cls.size(), 19u * 15u);
  EXPECT_EQ(cls.front().c_exp, -8);
  EXPECT_EQ(cls.front().gamma_exp, -8);
  EXPECT_EQ(cls[1].gamma_exp, -7);
  EXPECT_EQ(cls.back().c_exp, 10);
  EXPECT_EQ(cls.back().gamma_exp, 6);
  EXPECT_DOUBLE_EQ(cls.front().c, 1.0 / 256.0);
  const auto reg = GridSpec::regression().cells();
  EXPECT_EQ(reg.size(), 14u * 12u);
  EXPECT_DOUBLE_EQ(reg.front().c, 0.125);
  EXPECT_DOUBLE_EQ(reg.back().gamma, 8.0);
  GridSpec coarse = GridSpec::classification();
  coarse.step = 2;
  EXPECT_EQ(coarse.cells().size(), 10u * 8u);
  EXPECT_THROW((GridSpec{1, 0, 0, 0, 1, 2.0}.cells()), InvalidArgument);
}

TEST(Best, SingleCell) {
  const GridSpec g{3, 3, -1, -1, 1, 2.0};
  const auto r = grid_search_best(g, Objective::MaximizeAccuracy, [](const Cell&) { return 42.0; });
  EXPECT_EQ(r.selected.cell.c_exp, 3);
  EXPECT_EQ(r.selected.cell.gamma_exp, -1);
  EXPECT_EQ(r.selected.score, 42.0);
}

TEST(Best, PlantedOptimum) {
  const auto acc = grid_search_best(small_grid(), Objective::MaximizeAccuracy, planted({{{1, -1}, 97.0}}, 60.0));
  EXPECT_EQ(acc.selected.cell.c_exp, 1);
  EXPECT_EQ(acc.selected.cell.gamma_exp, -1);
  const auto rmse = grid_search_best(small_grid(), Objective::MinimizeRmse, planted({{{-2, 0}, 3.5}}, 9.0));
  EXPECT_EQ(rmse.selected.cell.c_exp, -2);
  EXPECT_EQ(rmse.selected.cell.gamma_exp, 0);
  EXPECT_EQ(rmse.table.size(), 25u);
}

TEST(Best, TiesPreferSmallerGammaThenSmallerC) {
  auto r = grid_search_best(small_grid(), Objective::MaximizeAccuracy,
                            planted({{{0, 1}, 90.0}, {{0, -2}, 90.0}, {{1, -3}, 90.0}}, 50.0));
  EXPECT_EQ(r.selected.cell.gamma_exp, -3);
  r = grid_search_best(small_grid(), Objective::MaximizeAccuracy,
                       planted({{{2, -1}, 90.0}, {{-1, -1}, 90.0}, {{0, 0}, 90.0}}, 50.0));
  EXPECT_EQ(r.selected.cell.gamma_exp, -1);
  EXPECT_EQ(r.selected.cell.c_exp, -1);
}

TEST(Bounded, AllQualifyGivesGloballySmallestGamma) {
  const auto r = grid_search_bounded(small_grid(), BoundPolicy::accuracy(geodata::TerrainClass::Flat),
                                     [](const Cell& c) { return 80.0 + c.c_exp - c.gamma_exp; });
  EXPECT_EQ(r.relaxations, 0);
  EXPECT_EQ(r.selected.cell.gamma_exp, -3);
  EXPECT_EQ(r.selected.cell.c_exp, -2);
  EXPECT_EQ(r.final_bound, 75.0);
}

TEST(Bounded, OneAccuracyRelaxationOnHillyTerrain) {
  const auto pol = BoundPolicy::accuracy(geodata::TerrainClass::Hilly);
  const auto r = grid_search_bounded(small_grid(), pol,
                                     planted({{{2, 1}, 88.0}, {{-1, 0}, 86.0}, {{1, 0}, 87.5}, {{0, -3}, 80.0}}, 60.0));
  EXPECT_EQ(r.relaxations, 1);
  EXPECT_EQ(r.trajectory, (std::vector<double>{90.0, 85.0}));
  EXPECT_EQ(r.final_bound, 85.0);
  EXPECT_EQ(r.selected.cell.gamma_exp, 0);
  EXPECT_EQ(r.selected.cell.c_exp, -1);
}

TEST(Bounded, OneRmseRelaxationStraddlingEight) {
  const auto r = grid_search_bounded(small_grid(), BoundPolicy::rmse(),
                                     planted({{{0, 1}, 8.2}, {{2, 0}, 8.24}, {{-2, -3}, 8.3}}, 12.0));
  EXPECT_EQ(r.relaxations, 1);
  EXPECT_DOUBLE_EQ(r.final_bound, std::sqrt(68.0));
  EXPECT_EQ(r.selected.cell.gamma_exp, 0);
  EXPECT_EQ(r.selected.cell.c_exp, 2);
}

TEST(Bounded, RelaxationSequencesAreExact) {
  const auto acc = BoundPolicy::accuracy(geodata::TerrainClass::Hilly);
  const auto flat = BoundPolicy::accuracy(geodata::TerrainClass::Flat);
  const auto rmse = BoundPolicy::rmse();
  for (int k = 0; k <= 50; ++k) {
    EXPECT_EQ(acc.bound_at(k), 90.0 - 5.0 * k);
    EXPECT_EQ(flat.bound_at(k), 75.0 - 5.0 * k);
    EXPECT_EQ(rmse.bound_at(k), std::sqrt(64.0 + 4.0 * k));
  }
  EXPECT_DOUBLE_EQ(rmse.bound_at(2), std::sqrt(72.0));
  // The RMSE law applied step by step agrees with the closed form.
  double b = 8.0;
  for (int k = 1; k <= 50; ++k) {
    b = std::sqrt(b * b + 4.0);
    EXPECT_NEAR(b, rmse.bound_at(k), 1e-12);
    EXPECT_GT(rmse.bound_at(k), rmse.bound_at(k - 1));
  }
}

TEST(Bounded, TrajectoryListsEveryBound) {
  const auto r =
      grid_search_bounded(small_grid(), BoundPolicy::rmse(), [](const Cell& c) { return 8.5 + 0.01 * c.c_exp; });
  // 8.48 needs sqrt(64 + 4k) >= 8.48, i.e. k >= 2
  EXPECT_EQ(r.relaxations, 2);
  ASSERT_EQ(r.trajectory.size(), 3u);
  EXPECT_EQ(r.trajectory[0], 8.0);
  EXPECT_EQ(r.trajectory[1], std::sqrt(68.0));
  EXPECT_EQ(r.trajectory[2], std::sqrt(72.0));
}

TEST(Bounded, ReturnedGammaIsMinimalAmongQualifying) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(40.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::pair<int, int>, double> scores;
    for (const auto& c : small_grid().cells()) scores[{c.c_exp, c.gamma_exp}] = u(rng);
    const auto pol = BoundPolicy::accuracy(geodata::TerrainClass::Hilly);
    const auto r = grid_search_bounded(small_grid(), pol, planted(scores, 0.0));
    for (const auto& cs : r.table)
      if (pol.qualifies(cs.score, r.final_bound)) {
        EXPECT_GE(cs.cell.gamma_exp, r.selected.cell.gamma_exp);
        if (cs.cell.gamma_exp == r.selected.cell.gamma_exp) EXPECT_GE(cs.cell.c_exp, r.selected.cell.c_exp);
      }
    if (r.relaxations > 0)
      for (const auto& cs : r.table) EXPECT_FALSE(pol.qualifies(cs.score, pol.bound_at(r.relaxations - 1)));
  }
}

TEST(Bounded, PathologicalEvaluateStops) {
  EXPECT_THROW(grid_search_bounded(small_grid(), BoundPolicy::rmse(),
                                   [](const Cell&) { return std::numeric_limits<double>::infinity(); }),
               NonTermination);
  EXPECT_THROW(grid_search_bounded(small_grid(), BoundPolicy::accuracy(geodata::TerrainClass::Flat),
                                   [](const Cell&) { return -1000.0; }),
               NonTermination);
}

TEST(Order, ResultsIndependentOfEvaluationOrder) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(70, 95); // integer scores force many ties
  std::map<std::pair<int, int>, double> scores;
  const auto cells = GridSpec::classification().cells();
  for (const auto& c : cells) scores[{c.c_exp, c.gamma_exp}] = u(rng);
  auto table = evaluate_grid(cells, planted(scores, 0.0));
  const auto best = select_best(table, Objective::MaximizeAccuracy);
  const auto bounded = select_bounded(table, BoundPolicy::accuracy(geodata::TerrainClass::Hilly));
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(table.begin(), table.end(), rng);
    EXPECT_EQ(select_best(table, Objective::MaximizeAccuracy), best);
    const auto b = select_bounded(table, BoundPolicy::accuracy(geodata::TerrainClass::Hilly));
    EXPECT_EQ(b.selected, bounded.selected);
    EXPECT_EQ(b.trajectory, bounded.trajectory);
  }
}

TEST(Order, ParallelEvaluationMatchesSequential) {
  const auto eval = [](const Cell& c) { return std::sin(c.c_exp * 1.3 + c.gamma_exp * 0.7); };
  const auto seq = grid_search_best(GridSpec::classification(), Objective::MaximizeAccuracy, eval, 1);
  const auto par = grid_search_best(GridSpec::classification(), Objective::MaximizeAccuracy, eval, 4);
  EXPECT_EQ(seq.table, par.table);
  EXPECT_EQ(seq.selected, par.selected);
}

TEST(Folds, PlainFoldsPartitionTheIndices) {
  const auto folds = plain_folds(23, 5, 3);
  std::vector<int> seen(23, 0);
  for (const auto& f : folds) {
    EXPECT_GE(f.size(), 4u);
    EXPECT_LE(f.size(), 5u);
    for (auto i : f) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_EQ(plain_folds(23, 5, 3), folds);
  EXPECT_THROW(plain_folds(3, 5, 1), FoldDegeneracy);
  EXPECT_THROW(plain_folds(10, 1, 1), InvalidArgument);
}

TEST(Folds, StratifiedFoldsHoldBothClasses) {
  std::vector<int> labels(40, -1);
  for (std::size_t i = 0; i < 12; ++i) labels[i * 3] = +1;
  const auto folds = stratified_folds(labels, 5, 1);
  for (const auto& f : folds) {
    int pos = 0;
    for (auto i : f) pos += labels[i] > 0;
    EXPECT_GE(pos, 2);
    EXPECT_LE(pos, 3);
    EXPECT_EQ(f.size(), 8u);
  }
  std::vector<int> few(20, -1);
  few[0] = few[1] = +1;
  EXPECT_THROW(stratified_folds(few, 5, 1), FoldDegeneracy);
}

TEST(CrossValidation, HandBuiltTwoFoldFixture) {
  // Fold 0 = {0, 1}, fold 1 = {2, 3}; score = sum of held-out indices.
  const Folds folds{{0, 1}, {2, 3}};
  std::vector<std::vector<std::size_t>> trains;
  const double mean = cross_validate(folds, [&](const auto& tr, const auto& te) {
    trains.push_back(tr);
    return static_cast<double>(te[0] + te[1]);
  });
  EXPECT_DOUBLE_EQ(mean, (1.0 + 5.0) / 2.0);
  EXPECT_EQ(trains[0], (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(trains[1], (std::vector<std::size_t>{0, 1}));
}

TEST(CrossValidation, PerfectClassifierScoresHundred) {
  std::vector<std::array<double, 1>> x;
  std::vector<int> z;
  for (int i = 0; i < 30; ++i) {
    x.push_back({i < 15 ? -2.0 - 0.1 * i : 2.0 + 0.1 * i});
    z.push_back(i < 15 ? -1 : +1);
  }
  EXPECT_DOUBLE_EQ(cross_validate_csvc(x, z, Cell{0, 0, 1.0, 1.0}), 100.0);
}

TEST(CrossValidation, ConstantTargetsHaveZeroRmse) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<std::array<double, 2>> x(25);
  for (auto& v : x) v = {g(rng), g(rng)};
  const std::vector<double> t(25, -95.0);
  EXPECT_DOUBLE_EQ(cross_validate_esvr(x, t, Cell{0, 0, 1.0, 1.0}), 0.0);
}

TEST(CrossValidation, DeterministicGivenSeed) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<std::array<double, 2>> x(60);
  std::vector<int> z(60);
  for (std::size_t i = 0; i < 60; ++i) {
    x[i] = {g(rng), g(rng)};
    z[i] = x[i][0] + 0.5 * g(rng) > 0 ? 1 : -1;
  }
  const Cell c{1, -1, 2.0, 0.5};
  EXPECT_EQ(cross_validate_csvc(x, z, c, 5, 11), cross_validate_csvc(x, z, c, 5, 11));
}

TEST(Report, ListsCellsTrajectoryAndSelection) {
  const auto r = grid_search_bounded(small_grid(), BoundPolicy::rmse(), planted({{{0, 1}, 8.2}}, 12.0));
  const auto text = render_tuning_report("regression bounded", r.table, r.selected, r.trajectory);
  EXPECT_NE(text.find("cells 25"), std::string::npos);
  EXPECT_NE(text.find("bound_trajectory 8 8.24621"), std::string::npos);
  EXPECT_NE(text.find("selected C=2^0 gamma=2^1 score=8.2"), std::string::npos);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  EXPECT_EQ(lines, 3u + 25u + 2u);
}
