#ifndef SVMPLAN_SVM_SCALER_HPP
#define SVMPLAN_SVM_SCALER_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "svmplan/error.hpp"

namespace svmplan::svm {

/// Z-score normalization with population statistics (divide by N).
template <std::size_t Dim>
struct BasicScaler {
  using Vector = std::array<double, Dim>;
  Vector means{};
  Vector std_devs{};

  Vector apply(const Vector& x) const {
    Vector out;
    for (std::size_t i = 0; i < Dim; ++i) out[i] = (x[i] - means[i]) / std_devs[i];
    return out;
  }

  Vector invert(const Vector& s) const {
    Vector out;
    for (std::size_t i = 0; i < Dim; ++i) out[i] = s[i] * std_devs[i] + means[i];
    return out;
  }

  std::vector<Vector> apply(const std::vector<Vector>& xs) const {
    std::vector<Vector> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(apply(x));
    return out;
  }

  friend bool operator==(const BasicScaler&, const BasicScaler&) = default;
};

using Scaler = BasicScaler<7>;

template <std::size_t Dim>
BasicScaler<Dim> fit_scaler(const std::vector<std::array<double, Dim>>& train) {
  if (train.size() < 2) throw InsufficientData("fit_scaler needs at least 2 samples");
  BasicScaler<Dim> s;
  const double n = static_cast<double>(train.size());
  for (std::size_t i = 0; i < Dim; ++i) {
    double mean = 0.0;
    for (const auto& x : train) mean += x[i];
    mean /= n;
    double var = 0.0;
    for (const auto& x : train) var += (x[i] - mean) * (x[i] - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
      throw DegenerateFeature("feature " + std::to_string(i) + " has zero variance over the training set");
    s.means[i] = mean;
    s.std_devs[i] = sd;
  }
  return s;
}

template <std::size_t Dim>
std::array<double, Dim> apply_scaler(const BasicScaler<Dim>& s, const std::array<double, Dim>& x) {
  return s.apply(x);
}

} // namespace svmplan::svm

#endif // SVMPLAN_SVM_SCALER_HPP
