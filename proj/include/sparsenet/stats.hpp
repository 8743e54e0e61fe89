#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace sparsenet {

// Population moments (divide by N) plus range of a sample.
struct Summary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double var = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.var = ss / static_cast<double>(values.size());
  s.std = std::sqrt(s.var);
  return s;
}

// Pearson correlation; 0 when either side is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n == 0) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Coefficient of determination against the mean of `truth`. A constant truth
// vector yields 0 by convention.
inline double r_squared(std::span<const double> truth, std::span<const double> predicted) {
  const std::size_t n = std::min(truth.size(), predicted.size());
  if (n == 0) return 0.0;
  bool constant = true;
  for (std::size_t i = 1; i < n && constant; ++i) constant = truth[i] == truth[0];
  if (constant) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += truth[i];
  mean /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot <= 0.0) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace sparsenet
