#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/estimators/ols.hpp"
#include "sparsenet/rng.hpp"

namespace sparsenet {

struct ForestParams {
  std::size_t n_trees = 100;
  // 0 selects ceil(d / 3).
  std::size_t max_features = 0;
  std::size_t min_leaf = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// CART regression tree grown on squared error. Leaves predict the mean of
// their samples; internal nodes send x[feature] <= threshold to the left.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    std::size_t samples = 0;
  };

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    std::size_t k = 0;
    while (nodes_[k].feature >= 0) {
      k = static_cast<std::size_t>(row(nodes_[k].feature) <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right);
    }
    return nodes_[k].value;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  // Unnormalized squared-error decrease per feature.
  const std::vector<double>& impurity_decrease() const noexcept { return decrease_; }

  // `rows` may repeat indices (bootstrap draws); each copy counts as a sample.
  static RegressionTree grow(const Matrix& x, const Vector& y, std::vector<std::size_t> rows, std::size_t max_features,
                             std::size_t min_leaf, Rng rng) {
    RegressionTree tree;
    const auto d = static_cast<std::size_t>(x.cols());
    tree.decrease_.assign(d, 0.0);
    max_features = std::clamp<std::size_t>(max_features, 1, std::max<std::size_t>(d, 1));
    min_leaf = std::max<std::size_t>(min_leaf, 1);

    struct Task {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Task> stack;
    tree.nodes_.push_back({});
    stack.push_back({0, 0, rows.size()});
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::vector<std::size_t> sorted;

    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::size_t count = task.end - task.begin;
      double sum = 0.0, sum_sq = 0.0;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t k = task.begin; k < task.end; ++k) {
        const double v = y(static_cast<Eigen::Index>(rows[k]));
        sum += v;
        sum_sq += v * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      Node& node = tree.nodes_[task.node];
      node.samples = count;
      node.value = sum / static_cast<double>(count);
      if (count < 2 * min_leaf || lo == hi) continue;
      const double parent_sse = std::max(0.0, sum_sq - sum * sum / static_cast<double>(count));

      // Visit features in random order; keep going past max_features until a
      // valid split turns up.
      double best_gain = 0.0;
      int best_feature = -1;
      double best_threshold = 0.0;
      for (std::size_t visited = 0; visited < d; ++visited) {
        if (visited >= max_features && best_feature >= 0) break;
        const std::size_t pick = visited + static_cast<std::size_t>(rng.below(d - visited));
        std::swap(features[visited], features[pick]);
        const auto f = static_cast<Eigen::Index>(features[visited]);

        sorted.assign(rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                      rows.begin() + static_cast<std::ptrdiff_t>(task.end));
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
          const double xa = x(static_cast<Eigen::Index>(a), f), xb = x(static_cast<Eigen::Index>(b), f);
          return xa < xb || (xa == xb && a < b);
        });
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t k = 0; k + 1 < count; ++k) {
          const double v = y(static_cast<Eigen::Index>(sorted[k]));
          left_sum += v;
          left_sq += v * v;
          const std::size_t nl = k + 1;
          const std::size_t nr = count - nl;
          if (nl < min_leaf) continue;
          if (nr < min_leaf) break;
          const double xa = x(static_cast<Eigen::Index>(sorted[k]), f);
          const double xb = x(static_cast<Eigen::Index>(sorted[k + 1]), f);
          if (!(xa < xb)) continue;
          const double right_sum = sum - left_sum;
          const double right_sq = sum_sq - left_sq;
          const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
          const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
          const double gain = parent_sse - sse_l - sse_r;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = xa + (xb - xa) / 2.0;
            if (!(best_threshold < xb)) best_threshold = xa;
          }
        }
      }
      if (best_feature < 0) continue;

      auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                rows.begin() + static_cast<std::ptrdiff_t>(task.end), [&](std::size_t r) {
                                  return x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold;
                                });
      const auto split = static_cast<std::size_t>(mid - rows.begin());
      tree.decrease_[static_cast<std::size_t>(best_feature)] += best_gain;
      const auto left = static_cast<std::int32_t>(tree.nodes_.size());
      tree.nodes_.push_back({});
      tree.nodes_.push_back({});
      Node& parent = tree.nodes_[task.node];
      parent.feature = best_feature;
      parent.threshold = best_threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left + 1), split, task.end});
      stack.push_back({static_cast<std::size_t>(left), task.begin, split});
    }
    return tree;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> decrease_;
};

class RandomForest {
 public:
  std::vector<RegressionTree> trees;
  std::size_t num_features = 0;

  Vector predict(const Matrix& x) const {
    Vector out = Vector::Zero(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double s = 0.0;
      for (const auto& t : trees) s += t.predict_row(x.row(r));
      out(r) = s / static_cast<double>(trees.size());
    }
    return out;
  }
};

// Bootstrap-aggregated regression trees; tree t draws from Rng(seed).split(t),
// so the result does not depend on the thread count.
inline RandomForest fit_rf(const Matrix& x, const Vector& y, const ForestParams& params = {}) {
  require_finite(x, y, "fit_rf");
  if (params.n_trees < 1) throw ArgumentError("fit_rf: n_trees must be >= 1");
  if (x.rows() < 1 || x.cols() < 1) throw ArgumentError("fit_rf: empty training matrix");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  const std::size_t max_features = params.max_features == 0 ? (d + 2) / 3 : params.max_features;

  RandomForest forest;
  forest.num_features = d;
  forest.trees.resize(params.n_trees);
  const Rng root(params.seed);
  auto grow_one = [&](std::size_t t) {
    Rng rng = root.split(t);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees[t] = RegressionTree::grow(x, y, std::move(rows), max_features, params.min_leaf, rng.split(1));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.n_trees)));
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) grow_one(t);
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < params.n_trees; t = next++) {
        try {
          grow_one(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return forest;
}

// Per tree: squared-error decrease summed per feature, normalized to 1. The
// forest value is the mean over trees, renormalized. All zeros when no tree
// ever split (constant target).
inline std::vector<double> feature_importance(const RandomForest& forest) {
  std::vector<double> total(forest.num_features, 0.0);
  for (const auto& tree : forest.trees) {
    const auto& dec = tree.impurity_decrease();
    const double s = std::accumulate(dec.begin(), dec.end(), 0.0);
    if (s <= 0.0) continue;
    for (std::size_t f = 0; f < total.size(); ++f) total[f] += dec[f] / s;
  }
  const double s = std::accumulate(total.begin(), total.end(), 0.0);
  if (s > 0.0) {
    for (auto& v : total) v /= s;
  }
  return total;
}

}  // namespace sparsenet
