#ifndef SVMPLAN_SVM_SMO_HPP
#define SVMPLAN_SVM_SMO_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "svmplan/error.hpp"
#include "svmplan/svm/kernel.hpp"

namespace svmplan::svm {

enum class WorkingSetRule {
  MaximalViolatingPair, // first-order: i = argmax over I_up, j = argmin over I_low
  SecondOrder,          // same i, j maximizing the guaranteed objective decrease
};

struct SolverOptions {
  double tol = 1e-3;
  std::uint64_t max_iterations = 10'000'000;
  std::size_t cache_bytes = std::size_t{64} << 20;
  WorkingSetRule rule = WorkingSetRule::MaximalViolatingPair;
};

struct SolverResult {
  std::vector<double> alpha;
  double rho = 0.0;            // decision offset: f(x) = sum y_t alpha_t K - rho
  double objective = 0.0;      // 0.5 a'Qa + p'a at the returned point
  double max_violation = 0.0;  // m(a) - M(a) from a freshly rebuilt gradient
  double equality_residual = 0.0; // |y'a|
  std::uint64_t iterations = 0;
};

/// Sequential minimal optimization for
///
///   min 0.5 a'Qa + p'a   s.t.  y'a = 0,  0 <= a_t <= C,
///
/// with Q_ts = y_t y_s K(src_t, src_s). Each variable t refers to sample
/// src[t] of the kernel cache, so the 2N-variable regression dual reuses the
/// N-sample kernel rows. Starts from a = 0.
template <std::size_t Dim>
SolverResult solve_dual(KernelCache<Dim>& K, const std::vector<std::size_t>& src, const std::vector<int>& y,
                        const std::vector<double>& p, double C, const SolverOptions& opt = {}) {
  const std::size_t l = y.size();
  if (src.size() != l || p.size() != l) throw InvalidArgument("solve_dual: mismatched problem sizes");
  if (!(C > 0.0)) throw InvalidArgument("solve_dual: C must be positive");
  if (!(opt.tol > 0.0)) throw InvalidArgument("solve_dual: tol must be positive");
  constexpr double tau = 1e-12;
  constexpr double inf = std::numeric_limits<double>::infinity();

  SolverResult r;
  auto& a = r.alpha;
  a.assign(l, 0.0);
  std::vector<double> G(p);
  std::vector<double> QD(l);
  for (std::size_t t = 0; t < l; ++t) QD[t] = K(src[t], src[t]);

  auto up = [&](std::size_t t) { return y[t] > 0 ? a[t] < C : a[t] > 0.0; };
  auto low = [&](std::size_t t) { return y[t] > 0 ? a[t] > 0.0 : a[t] < C; };

  // Returns the KKT gap m - M and the working pair.
  auto select = [&](std::size_t& i, std::size_t& j) {
    double gmax = -inf, gmin = inf;
    i = j = l;
    for (std::size_t t = 0; t < l; ++t) {
      const double v = -y[t] * G[t];
      if (up(t) && v > gmax) gmax = v, i = t;
      if (low(t) && v < gmin) gmin = v, j = t;
    }
    if (i == l || j == l) return 0.0;
    if (opt.rule == WorkingSetRule::SecondOrder && gmax - gmin > opt.tol) {
      const auto& Ki = K.row(src[i]);
      double best = inf;
      for (std::size_t t = 0; t < l; ++t) {
        if (!low(t)) continue;
        const double b = gmax + y[t] * G[t];
        if (b <= 0.0) continue;
        double quad = QD[i] + QD[t] - 2.0 * y[i] * y[t] * Ki[src[t]];
        if (quad <= 0.0) quad = tau;
        const double obj = -(b * b) / quad;
        if (obj < best) best = obj, j = t;
      }
    }
    return gmax - gmin;
  };

  auto rebuild_gradient = [&] {
    G = p;
    for (std::size_t s = 0; s < l; ++s) {
      if (a[s] == 0.0) continue;
      const auto& Ks = K.row(src[s]);
      const double ys_as = y[s] * a[s];
      for (std::size_t t = 0; t < l; ++t) G[t] += ys_as * y[t] * Ks[src[t]];
    }
  };

  std::size_t i = 0, j = 0;
  for (;;) {
    double gap = select(i, j);
    if (gap <= opt.tol) {
      rebuild_gradient();
      gap = select(i, j);
      if (gap <= opt.tol) {
        r.max_violation = std::max(gap, 0.0);
        break;
      }
    }
    if (r.iterations >= opt.max_iterations)
      throw NonConvergence("SMO did not reach KKT tolerance within " + std::to_string(opt.max_iterations) +
                           " iterations (gap " + std::to_string(gap) + ")");
    ++r.iterations;

    const auto& Ki = K.row(src[i]);
    const auto& Kj = K.row(src[j]);
    const double Qij = y[i] * y[j] * Ki[src[j]];
    const double ai = a[i], aj = a[j];
    if (y[i] != y[j]) {
      double quad = QD[i] + QD[j] + 2.0 * Qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) a[j] = 0.0, a[i] = diff;
      } else if (a[i] < 0.0) {
        a[i] = 0.0, a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > C) a[i] = C, a[j] = C - diff;
      } else if (a[j] > C) {
        a[j] = C, a[i] = C + diff;
      }
    } else {
      double quad = QD[i] + QD[j] - 2.0 * Qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) a[i] = C, a[j] = sum - C;
      } else if (a[j] < 0.0) {
        a[j] = 0.0, a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) a[j] = C, a[i] = sum - C;
      } else if (a[i] < 0.0) {
        a[i] = 0.0, a[j] = sum;
      }
    }
    const double di = (a[i] - ai) * y[i];
    const double dj = (a[j] - aj) * y[j];
    for (std::size_t t = 0; t < l; ++t) G[t] += y[t] * (di * Ki[src[t]] + dj * Kj[src[t]]);
  }

  double ub = inf, lb = -inf, sum_free = 0.0, eq = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yG = y[t] * G[t];
    if (a[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (a[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
    r.objective += 0.5 * a[t] * (G[t] + p[t]);
    eq += y[t] * a[t];
  }
  r.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  r.equality_residual = std::abs(eq);
  return r;
}

/// Objective 0.5 a'Qa + p'a evaluated directly from the kernel, for checks.
template <std::size_t Dim>
double dual_objective(KernelCache<Dim>& K, const std::vector<std::size_t>& src, const std::vector<int>& y,
                      const std::vector<double>& p, const std::vector<double>& a) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    lin += p[t] * a[t];
    if (a[t] == 0.0) continue;
    for (std::size_t s = 0; s < a.size(); ++s)
      if (a[s] != 0.0) quad += a[t] * a[s] * y[t] * y[s] * K(src[t], src[s]);
  }
  return 0.5 * quad + lin;
}

} // namespace svmplan::svm

#endif // SVMPLAN_SVM_SMO_HPP
