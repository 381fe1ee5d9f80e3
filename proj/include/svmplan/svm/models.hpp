#ifndef SVMPLAN_SVM_MODELS_HPP
#define SVMPLAN_SVM_MODELS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "svmplan/error.hpp"
#include "svmplan/svm/kernel.hpp"
#include "svmplan/svm/smo.hpp"

namespace svmplan::svm {

struct TrainingInfo {
  std::uint64_t iterations = 0;
  double max_violation = 0.0;
  double objective = 0.0;
  double equality_residual = 0.0;
  std::size_t n_samples = 0;

  friend bool operator==(const TrainingInfo&, const TrainingInfo&) = default;
};

inline TrainingInfo info_of(const SolverResult& r, std::size_t n) {
  return {r.iterations, r.max_violation, r.objective, r.equality_residual, n};
}

/// Kernel expansion sum_i c_i K(sv_i, x) + bias shared by both model kinds.
template <std::size_t Dim>
struct KernelExpansion {
  using Vector = std::array<double, Dim>;
  std::vector<Vector> support_vectors;
  std::vector<double> coefficients;
  double bias = 0.0;
  KernelParams kernel;
  double c_param = 1.0;
  TrainingInfo info;

  double value(const Vector& x) const {
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) s += coefficients[i] * rbf(kernel, support_vectors[i], x);
    return s;
  }

  friend bool operator==(const KernelExpansion&, const KernelExpansion&) = default;
};

/// Classifier; coefficients are z_i * alpha_i of the support vectors.
template <std::size_t Dim>
struct BasicSvcModel : KernelExpansion<Dim> {
  using typename KernelExpansion<Dim>::Vector;
  double decision_value(const Vector& x) const { return this->value(x); }
  /// sign(0) = +1
  int decide(const Vector& x) const { return decision_value(x) >= 0.0 ? +1 : -1; }

  friend bool operator==(const BasicSvcModel&, const BasicSvcModel&) = default;
};

/// Regressor; coefficients are alpha*_i - alpha_i of the support vectors.
template <std::size_t Dim>
struct BasicSvrModel : KernelExpansion<Dim> {
  using typename KernelExpansion<Dim>::Vector;
  double epsilon = 3.0;
  double predict(const Vector& x) const { return this->value(x); }

  friend bool operator==(const BasicSvrModel&, const BasicSvrModel&) = default;
};

using SvcModel = BasicSvcModel<7>;
using SvrModel = BasicSvrModel<7>;

template <std::size_t Dim>
int decide(const BasicSvcModel<Dim>& m, const std::array<double, Dim>& x) {
  return m.decide(x);
}

template <std::size_t Dim>
double predict(const BasicSvrModel<Dim>& m, const std::array<double, Dim>& x) {
  return m.predict(x);
}

struct CsvcProblem {
  std::vector<std::size_t> src;
  std::vector<int> y;
  std::vector<double> p;
};

/// Dual of the soft-margin classifier: Q = (z z') .* K, p = -e.
inline CsvcProblem csvc_problem(const std::vector<int>& labels) {
  CsvcProblem pr;
  const std::size_t n = labels.size();
  pr.src.resize(n);
  pr.y = labels;
  pr.p.assign(n, -1.0);
  for (std::size_t i = 0; i < n; ++i) pr.src[i] = i;
  return pr;
}

/// Dual of the epsilon-insensitive regressor over [alpha; alpha*]:
///   min 0.5 (a - a*)'K(a - a*) + eps sum(a + a*) + sum m_i (a_i - a*_i)
///   s.t. sum(a - a*) = 0, 0 <= a, a* <= C.
/// In the generic form this is y = [+1; -1], p = [eps + m; eps - m].
inline CsvcProblem esvr_problem(const std::vector<double>& targets, double epsilon) {
  CsvcProblem pr;
  const std::size_t n = targets.size();
  pr.src.resize(2 * n);
  pr.y.resize(2 * n);
  pr.p.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    pr.src[i] = pr.src[n + i] = i;
    pr.y[i] = +1;
    pr.y[n + i] = -1;
    pr.p[i] = epsilon + targets[i];
    pr.p[n + i] = epsilon - targets[i];
  }
  return pr;
}

template <std::size_t Dim>
SolverResult solve_csvc(const std::vector<std::array<double, Dim>>& x, const std::vector<int>& labels, double c_param,
                        const KernelParams& kernel, const SolverOptions& opt = {}) {
  if (x.size() != labels.size()) throw InvalidArgument("train_csvc: features and labels differ in length");
  if (!(c_param > 0.0)) throw InvalidArgument("train_csvc: C must be positive");
  require_valid(kernel);
  bool pos = false, neg = false;
  for (int z : labels) {
    if (z != 1 && z != -1) throw InvalidArgument("train_csvc: labels must be +1 or -1");
    (z > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw SingleClassData("train_csvc: training set contains a single class");
  KernelCache<Dim> K(x, kernel, opt.cache_bytes);
  const auto pr = csvc_problem(labels);
  return solve_dual(K, pr.src, pr.y, pr.p, c_param, opt);
}

template <std::size_t Dim>
BasicSvcModel<Dim> train_csvc(const std::vector<std::array<double, Dim>>& x, const std::vector<int>& labels,
                              double c_param, const KernelParams& kernel, const SolverOptions& opt = {}) {
  const auto r = solve_csvc(x, labels, c_param, kernel, opt);
  BasicSvcModel<Dim> m;
  m.kernel = kernel;
  m.c_param = c_param;
  m.bias = -r.rho;
  m.info = info_of(r, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (r.alpha[i] > 0.0) {
      m.support_vectors.push_back(x[i]);
      m.coefficients.push_back(labels[i] * r.alpha[i]);
    }
  }
  return m;
}

template <std::size_t Dim>
SolverResult solve_esvr(const std::vector<std::array<double, Dim>>& x, const std::vector<double>& targets,
                        double c_param, const KernelParams& kernel, double epsilon, const SolverOptions& opt = {}) {
  if (x.size() != targets.size()) throw InvalidArgument("train_esvr: features and targets differ in length");
  if (x.size() < 2) throw InsufficientData("train_esvr needs at least 2 samples");
  if (!(c_param > 0.0)) throw InvalidArgument("train_esvr: C must be positive");
  if (!(epsilon >= 0.0)) throw InvalidArgument("train_esvr: epsilon must be non-negative");
  require_valid(kernel);
  KernelCache<Dim> K(x, kernel, opt.cache_bytes);
  const auto pr = esvr_problem(targets, epsilon);
  return solve_dual(K, pr.src, pr.y, pr.p, c_param, opt);
}

template <std::size_t Dim>
BasicSvrModel<Dim> train_esvr(const std::vector<std::array<double, Dim>>& x, const std::vector<double>& targets,
                              double c_param, const KernelParams& kernel, double epsilon = 3.0,
                              const SolverOptions& opt = {}) {
  const auto r = solve_esvr(x, targets, c_param, kernel, epsilon, opt);
  const std::size_t n = x.size();
  BasicSvrModel<Dim> m;
  m.kernel = kernel;
  m.c_param = c_param;
  m.epsilon = epsilon;
  m.bias = r.rho;
  m.info = info_of(r, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double coef = r.alpha[n + i] - r.alpha[i];
    if (coef != 0.0) {
      m.support_vectors.push_back(x[i]);
      m.coefficients.push_back(coef);
    }
  }
  return m;
}

} // namespace svmplan::svm

#endif // SVMPLAN_SVM_MODELS_HPP
