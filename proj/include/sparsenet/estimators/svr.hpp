#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/estimators/ols.hpp"

namespace sparsenet {

enum class KernelKind { linear, rbf, poly };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::poly: return "poly";
  }
  return "unknown";
}

struct SvrParams {
  KernelKind kernel = KernelKind::rbf;
  double c = 1.0;
  double epsilon = 0.1;
  // <= 0 selects 1 / (d * variance of the training matrix).
  double gamma = 0.0;
  int degree = 3;
  double coef0 = 0.0;
  double tolerance = 1e-3;
  std::int64_t max_iterations = 10'000'000;
  std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SvrModel {
  KernelKind kernel = KernelKind::rbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 0.0;
  Matrix support;      // support vectors, one per row
  Vector dual_coef;    // alpha_i - alpha_i^*
  double bias = 0.0;
  std::int64_t iterations = 0;
  double kkt_violation = 0.0;

  double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
    switch (kernel) {
      case KernelKind::linear: return a.dot(b);
      case KernelKind::rbf: return std::exp(-gamma * (a - b).squaredNorm());
      case KernelKind::poly: return std::pow(gamma * a.dot(b) + coef0, degree);
    }
    return 0.0;
  }

  Vector predict(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double s = bias;
      for (Eigen::Index i = 0; i < support.rows(); ++i) s += dual_coef(i) * kernel_value(support.row(i), x.row(r));
      out(r) = s;
    }
    return out;
  }
};

namespace detail {

// LRU cache of kernel matrix rows over the l training points.
class KernelRows {
 public:
  KernelRows(const SvrModel& kernel, const Matrix& x, std::size_t cache_bytes)
      : kernel_(kernel), x_(x), l_(static_cast<std::size_t>(x.rows())) {
    capacity_ = std::max<std::size_t>(2, cache_bytes / std::max<std::size_t>(1, l_ * sizeof(double)));
    diag_.resize(l_);
    for (std::size_t i = 0; i < l_; ++i) diag_[i] = kernel_.kernel_value(x_.row(i), x_.row(i));
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> values(l_);
    for (std::size_t j = 0; j < l_; ++j) values[j] = kernel_.kernel_value(x_.row(i), x_.row(j));
    lru_.emplace_front(i, std::move(values));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

  double diag(std::size_t i) const { return diag_[i]; }

 private:
  const SvrModel& kernel_;
  const Matrix& x_;
  std::size_t l_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> index_;
};

}  // namespace detail

// Epsilon-insensitive support vector regression. The dual over 2l variables
// (alpha, alpha^*) is solved by SMO with second-order working-set selection;
// iteration stops once the maximal KKT violation drops below `tolerance`.
inline SvrModel fit_svr(const Matrix& x, const Vector& y, const SvrParams& params = {}) {
  require_finite(x, y, "fit_svr");
  if (x.rows() < 1) throw ArgumentError("fit_svr: empty training set");
  if (!(params.c > 0.0)) throw ArgumentError("fit_svr: C must be positive");
  if (!(params.epsilon >= 0.0)) throw ArgumentError("fit_svr: epsilon must be non-negative");
  if (params.kernel == KernelKind::poly && params.degree < 1) throw ArgumentError("fit_svr: degree must be >= 1");

  SvrModel model;
  model.kernel = params.kernel;
  model.degree = params.degree;
  model.coef0 = params.coef0;
  model.gamma = params.gamma;
  if (model.gamma <= 0.0) {
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
  }

  const std::size_t l = static_cast<std::size_t>(x.rows());
  const std::size_t n2 = 2 * l;
  const double c = params.c;
  constexpr double tau = 1e-12;
  std::vector<double> alpha(n2, 0.0);
  std::vector<signed char> sign(n2);
  std::vector<double> grad(n2);
  for (std::size_t i = 0; i < l; ++i) {
    sign[i] = 1;
    sign[i + l] = -1;
    grad[i] = params.epsilon - y(static_cast<Eigen::Index>(i));
    grad[i + l] = params.epsilon + y(static_cast<Eigen::Index>(i));
  }
  detail::KernelRows rows(model, x, params.cache_bytes);
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto base = [&](std::size_t t) { return t < l ? t : t - l; };

  std::int64_t iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  for (;;) {
    // Maximal violating index i from the "up" set.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n2;
    for (std::size_t t = 0; t < n2; ++t) {
      if (sign[t] == 1) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n2;
    if (i != n2) {
      const auto& ki = rows.row(base(i));
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n2; ++t) {
        double diff = 0.0;
        if (sign[t] == 1) {
          if (lower(t)) continue;
          diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
        } else {
          if (upper(t)) continue;
          diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
        }
        if (diff > 0.0) {
          double quad = rows.diag(base(i)) + rows.diag(base(t)) - 2.0 * ki[base(t)];
          if (quad <= 0.0) quad = tau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) { best = obj; j = t; }
        }
      }
    }
    violation = (i == n2) ? 0.0 : gmax + gmax2;
    if (i == n2 || j == n2 || violation < params.tolerance) break;
    if (iter >= params.max_iterations) {
      throw FittingError("fit_svr: no convergence after " + std::to_string(iter) +
                         " iterations, final KKT violation " + std::to_string(violation));
    }
    ++iter;

    const auto& ki = rows.row(base(i));
    const std::vector<double> ki_copy = ki;  // the next row() call may evict it
    const auto& kj = rows.row(base(j));
    const double kij = ki_copy[base(j)];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (sign[i] != sign[j]) {
      // Q_ij = -K_ij here.
      double quad = rows.diag(base(i)) + rows.diag(base(j)) + 2.0 * (-kij);
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = rows.diag(base(i)) + rows.diag(base(j)) - 2.0 * kij;
      if (quad <= 0.0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n2; ++t) {
      // Q_it = sign_i sign_t K(base i, base t)
      grad[t] += sign[t] * (sign[i] * ki_copy[base(t)] * di + sign[j] * kj[base(t)] * dj);
    }
  }

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n2; ++t) {
    const double yg = sign[t] * grad[t];
    if (upper(t)) {
      if (sign[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (sign[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  const double rho = free_count > 0 ? sum_free / static_cast<double>(free_count) : (ub + lb) / 2.0;

  std::vector<Eigen::Index> support_rows;
  std::vector<double> coef;
  for (std::size_t i = 0; i < l; ++i) {
    const double b = alpha[i] - alpha[i + l];
    if (b != 0.0) {
      support_rows.push_back(static_cast<Eigen::Index>(i));
      coef.push_back(b);
    }
  }
  model.support.resize(static_cast<Eigen::Index>(support_rows.size()), x.cols());
  model.dual_coef.resize(static_cast<Eigen::Index>(coef.size()));
  for (std::size_t k = 0; k < support_rows.size(); ++k) {
    model.support.row(static_cast<Eigen::Index>(k)) = x.row(support_rows[k]);
    model.dual_coef(static_cast<Eigen::Index>(k)) = coef[k];
  }
  model.bias = -rho;
  model.iterations = iter;
  model.kkt_violation = violation;
  return model;
}

}  // namespace sparsenet
