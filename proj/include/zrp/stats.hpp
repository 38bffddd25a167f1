#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "zrp/error.hpp"

namespace zrp {

// Right-continuous empirical CDF with optional weights.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples)
      : Ecdf(std::move(samples), {}) {}

  Ecdf(std::vector<double> samples, std::vector<double> weights) {
    if (!weights.empty() && weights.size() != samples.size())
      fail(Errc::invalid_config, "weights must match samples");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
    values_.reserve(samples.size());
    weights_.reserve(samples.size());
    for (std::size_t i : order) {
      values_.push_back(samples[i]);
      weights_.push_back(weights.empty() ? 1.0 : weights[i]);
    }
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    cum_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cum_.begin());
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& sorted_values() const { return values_; }

  double at(double x) const {
    if (values_.empty()) return 0.0;
    auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - values_.begin()) - 1] / total_;
  }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cum_;
  double total_ = 0.0;
};

// Two-sided Kolmogorov-Smirnov distance between an ECDF and a reference CDF,
// evaluated at the sample points with both one-sided gaps. The lower gap uses
// the left limit of the reference, so reference atoms that sit exactly on a
// sample point are not counted as discrepancy.
inline double ks_distance(const Ecdf& ecdf, const std::function<double(double)>& cdf) {
  const auto& xs = ecdf.sorted_values();
  double d = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i + 1 < xs.size() && xs[i + 1] == xs[i]) continue;  // evaluate tie blocks once
    const double x = xs[i];
    const double here = ecdf.at(x);
    d = std::max(d, std::max(here - cdf(x), cdf(std::nextafter(x, -1e300)) - prev));
    prev = here;
  }
  return d;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  out.n = xs.size();
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(xs.size()) * (static_cast<double>(xs.size()) - 1)));
  }
  return out;
}

// Bernoulli proportion with normal-approximation standard error.
inline MeanSe proportion_se(std::int64_t hits, std::int64_t n) {
  MeanSe out;
  out.n = static_cast<std::size_t>(n);
  if (n == 0) return out;
  out.mean = static_cast<double>(hits) / static_cast<double>(n);
  out.se = std::sqrt(out.mean * (1.0 - out.mean) / static_cast<double>(n));
  return out;
}

}  // namespace zrp
