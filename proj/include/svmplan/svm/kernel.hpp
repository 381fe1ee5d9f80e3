#ifndef SVMPLAN_SVM_KERNEL_HPP
#define SVMPLAN_SVM_KERNEL_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <list>
#include <unordered_map>
#include <utility>
#include <vector>

#include "svmplan/error.hpp"

namespace svmplan::svm {

struct KernelParams {
  double gamma = 1.0;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

inline void require_valid(const KernelParams& k) {
  if (!(k.gamma > 0.0) || !std::isfinite(k.gamma)) throw InvalidArgument("kernel gamma must be positive");
}

template <std::size_t Dim>
double squared_distance(const std::array<double, Dim>& x, const std::array<double, Dim>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

/// K(x, y) = exp(-gamma |x - y|^2)
template <std::size_t Dim>
double rbf(const KernelParams& k, const std::array<double, Dim>& x, const std::array<double, Dim>& y) {
  return std::exp(-k.gamma * squared_distance(x, y));
}

/// LRU cache of kernel rows K(i, .) over a fixed sample set. The byte budget
/// is a soft cap; at least two rows are always kept so a working pair fits.
template <std::size_t Dim>
class KernelCache {
public:
  KernelCache(const std::vector<std::array<double, Dim>>& x, KernelParams k, std::size_t byte_budget)
      : x_(x), k_(k) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.size()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, byte_budget / row_bytes);
  }

  std::size_t size() const { return x_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t misses() const { return misses_; }

  double operator()(std::size_t i, std::size_t j) const { return rbf(k_, x_[i], x_[j]); }

  /// The returned reference stays valid until `capacity()` other rows are requested.
  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    ++misses_;
    std::vector<double> r;
    if (lru_.size() >= capacity_) {
      r = std::move(lru_.back().second);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    r.resize(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j) r[j] = rbf(k_, x_[i], x_[j]);
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

private:
  const std::vector<std::array<double, Dim>>& x_;
  KernelParams k_;
  std::size_t capacity_ = 2;
  std::size_t misses_ = 0;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, typename decltype(lru_)::iterator> index_;
};

} // namespace svmplan::svm

#endif // SVMPLAN_SVM_KERNEL_HPP
