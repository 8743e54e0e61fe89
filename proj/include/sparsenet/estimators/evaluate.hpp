#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/estimators/forest.hpp"
#include "sparsenet/estimators/ols.hpp"
#include "sparsenet/estimators/svr.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/records.hpp"
#include "sparsenet/rng.hpp"
#include "sparsenet/stats.hpp"

namespace sparsenet {

enum class EstimatorTag { ols, svm_lin, svm_rbf, svm_pol, rf };

inline constexpr std::array<EstimatorTag, 5> kAllEstimators = {
    EstimatorTag::ols, EstimatorTag::svm_lin, EstimatorTag::svm_rbf, EstimatorTag::svm_pol, EstimatorTag::rf};

inline std::string_view to_string(EstimatorTag t) {
  switch (t) {
    case EstimatorTag::ols: return "ols";
    case EstimatorTag::svm_lin: return "svm_lin";
    case EstimatorTag::svm_rbf: return "svm_rbf";
    case EstimatorTag::svm_pol: return "svm_pol";
    case EstimatorTag::rf: return "rf";
  }
  return "unknown";
}

inline EstimatorTag parse_estimator(std::string_view name) {
  for (auto t : kAllEstimators) {
    if (to_string(t) == name) return t;
  }
  throw ArgumentError("unknown estimator '" + std::string(name) + "' (expected ols, svm_lin, svm_rbf, svm_pol or rf)");
}

struct SplitProtocol {
  double train_ratio = 0.7;
  int repetitions = 20;
  // Empty selects seeds 0..repetitions-1.
  std::vector<std::uint64_t> seeds;

  void validate() const {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ArgumentError("train_ratio must lie in (0, 1)");
    if (repetitions < 1) throw ArgumentError("repetitions must be >= 1");
    if (!seeds.empty() && seeds.size() != static_cast<std::size_t>(repetitions)) {
      throw ArgumentError("seed list length differs from repetitions");
    }
  }

  std::vector<std::uint64_t> resolved_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out(static_cast<std::size_t>(repetitions));
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return out;
  }
};

// Named feature columns plus the regression target, one row per usable record.
struct FeatureTable {
  std::vector<std::string> columns;
  Matrix x;
  Vector y;
  std::size_t skipped = 0;  // records without a usable target

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    std::string valid;
    for (const auto& c : columns) valid += (valid.empty() ? "" : ", ") + c;
    throw SchemaError("dataset has no column '" + std::string(name) + "' (available: " + valid + ")");
  }

  Matrix select(const std::vector<std::string_view>& names) const {
    Matrix out(x.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) {
      out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(column(names[k])));
    }
    return out;
  }
};

inline FeatureTable feature_table(const std::vector<ExperimentRecord>& records, bool use_val = false) {
  FeatureTable t;
  for (auto name : kFeatureNames) t.columns.emplace_back(name);
  std::vector<const ExperimentRecord*> usable;
  for (const auto& r : records) {
    if (r.usable()) usable.push_back(&r);
    else ++t.skipped;
  }
  t.x.resize(static_cast<Eigen::Index>(usable.size()), static_cast<Eigen::Index>(kNumFeatures));
  t.y.resize(static_cast<Eigen::Index>(usable.size()));
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      t.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = usable[i]->features[f];
    }
    t.y(static_cast<Eigen::Index>(i)) = use_val ? *usable[i]->val_accuracy : *usable[i]->test_accuracy;
  }
  return t;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

// CSV with a header row. Any subset of feature columns may be present; the
// target column must be. Rows with an empty target are skipped.
inline FeatureTable read_feature_csv(const std::filesystem::path& path, bool use_val = false) {
  std::ifstream in(path);
  if (!in) throw FormatError(0, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV file");
  const auto header = detail::split_csv_line(line);
  const std::string target = use_val ? "val_accuracy" : "test_accuracy";
  std::size_t target_col = header.size();
  FeatureTable t;
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == target) target_col = i;
    else if (feature_index(header[i])) {
      t.columns.push_back(header[i]);
      feature_cols.push_back(i);
    }
  }
  if (target_col == header.size()) throw SchemaError("dataset has no column '" + target + "'");

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  std::size_t line_no = 1;
  auto number = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParseError(line_no, "'" + s + "' is not a number");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw ParseError(line_no, "expected " + std::to_string(header.size()) + " cells");
    if (cells[target_col].empty()) {
      ++t.skipped;
      continue;
    }
    ys.push_back(number(cells[target_col]));
    std::vector<double> row;
    for (auto c : feature_cols) row.push_back(number(cells[c]));
    rows.push_back(std::move(row));
  }
  t.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  t.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      t.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = rows[i][f];
    }
    t.y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return t;
}

// JSON lines or (by .csv extension) CSV.
inline FeatureTable load_feature_table(const std::filesystem::path& path, bool use_val = false) {
  if (path.extension() == ".csv") return read_feature_csv(path, use_val);
  return feature_table(read_records(path), use_val);
}

struct EvaluateOptions {
  SvrParams svr;
  ForestParams forest;
  unsigned threads = 1;
  std::size_t min_records = 50;
};

inline SvrParams svr_params_for(EstimatorTag tag, SvrParams base) {
  if (tag == EstimatorTag::svm_lin) base.kernel = KernelKind::linear;
  else if (tag == EstimatorTag::svm_rbf) base.kernel = KernelKind::rbf;
  else if (tag == EstimatorTag::svm_pol) base.kernel = KernelKind::poly;
  return base;
}

struct EstimatorReport {
  EstimatorTag estimator = EstimatorTag::ols;
  FeatureSetId feature_set = FeatureSetId::omega;
  std::vector<std::string> features;
  std::vector<double> r2;
  std::vector<double> pearson_r;
  double r2_mean = 0.0;
  double r2_std = 0.0;
  double pearson_mean = 0.0;
  // RF only: per-feature importance mean and std over repetitions.
  std::vector<double> importance_mean;
  std::vector<double> importance_std;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

struct RepetitionResult {
  double r2 = 0.0;
  double pearson_r = 0.0;
  std::vector<double> importance;
};

inline RepetitionResult run_repetition(const Matrix& x, const Vector& y, EstimatorTag tag, std::uint64_t seed,
                                       std::size_t n_test, const EvaluateOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_train = n - n_test;
  auto gather = [&](std::size_t begin, std::size_t end, Matrix& xs, Vector& ys) {
    xs.resize(static_cast<Eigen::Index>(end - begin), x.cols());
    ys.resize(static_cast<Eigen::Index>(end - begin));
    for (std::size_t k = begin; k < end; ++k) {
      xs.row(static_cast<Eigen::Index>(k - begin)) = x.row(static_cast<Eigen::Index>(order[k]));
      ys(static_cast<Eigen::Index>(k - begin)) = y(static_cast<Eigen::Index>(order[k]));
    }
  };
  Matrix x_train, x_test;
  Vector y_train, y_test;
  gather(0, n_train, x_train, y_train);
  gather(n_train, n, x_test, y_test);

  RepetitionResult out;
  Vector pred;
  if (tag == EstimatorTag::rf) {
    ForestParams fp = opts.forest;
    fp.seed = Rng(seed).split(1).next_u64() ^ opts.forest.seed;
    fp.threads = 1;
    const RandomForest forest = fit_rf(x_train, y_train, fp);
    pred = forest.predict(x_test);
    out.importance = feature_importance(forest);
  } else {
    const Standardizer z = Standardizer::fit(x_train);
    const Matrix zs_train = z.transform(x_train);
    const Matrix zs_test = z.transform(x_test);
    if (tag == EstimatorTag::ols) pred = fit_ols(zs_train, y_train).predict(zs_test);
    else pred = fit_svr(zs_train, y_train, svr_params_for(tag, opts.svr)).predict(zs_test);
  }
  const std::span<const double> truth(y_test.data(), static_cast<std::size_t>(y_test.size()));
  const std::span<const double> guess(pred.data(), static_cast<std::size_t>(pred.size()));
  out.r2 = r_squared(truth, guess);
  out.pearson_r = pearson(truth, guess);
  return out;
}

// Repeated random train/test splits; repetitions run in parallel but are
// aggregated in seed order.
inline EstimatorReport evaluate(const FeatureTable& table, EstimatorTag tag, FeatureSetId set,
                                const SplitProtocol& protocol = {}, const EvaluateOptions& opts = {}) {
  protocol.validate();
  const auto members = feature_set_members(set);
  const Matrix x = table.select(members);
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < opts.min_records) {
    throw ArgumentError("evaluate: need at least " + std::to_string(opts.min_records) + " usable records, found " +
                        std::to_string(n));
  }
  const auto n_test = static_cast<std::size_t>(std::ceil((1.0 - protocol.train_ratio) * static_cast<double>(n) - 1e-9));
  if (n_test < 2 || n_test >= n) throw ArgumentError("evaluate: split leaves an empty train or test set");

  const auto seeds = protocol.resolved_seeds();
  std::vector<RepetitionResult> results(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        results[k] = run_repetition(x, table.y, tag, seeds[k], n_test, opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(seeds.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EstimatorReport rep;
  rep.estimator = tag;
  rep.feature_set = set;
  for (auto m : members) rep.features.emplace_back(m);
  rep.train_rows = n - n_test;
  rep.test_rows = n_test;
  for (const auto& r : results) {
    rep.r2.push_back(r.r2);
    rep.pearson_r.push_back(r.pearson_r);
  }
  const Summary r2 = summarize(rep.r2);
  rep.r2_mean = r2.mean;
  rep.r2_std = r2.std;
  rep.pearson_mean = summarize(rep.pearson_r).mean;
  if (tag == EstimatorTag::rf) {
    for (std::size_t f = 0; f < members.size(); ++f) {
      std::vector<double> col;
      for (const auto& r : results) col.push_back(r.importance[f]);
      const Summary s = summarize(col);
      rep.importance_mean.push_back(s.mean);
      rep.importance_std.push_back(s.std);
    }
  }
  return rep;
}

inline std::string mean_pm_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f+/-%.4f", mean, std);
  return buf;
}

inline Json hyperparameters_json(const EvaluateOptions& opts, const SplitProtocol& protocol) {
  Json j;
  j["train_ratio"] = protocol.train_ratio;
  j["repetitions"] = protocol.repetitions;
  j["seeds"] = protocol.resolved_seeds();
  j["svr_c"] = opts.svr.c;
  j["svr_epsilon"] = opts.svr.epsilon;
  j["svr_gamma"] = opts.svr.gamma > 0.0 ? Json(opts.svr.gamma) : Json("1/(d*var)");
  j["svr_degree"] = opts.svr.degree;
  j["svr_coef0"] = opts.svr.coef0;
  j["svr_tolerance"] = opts.svr.tolerance;
  j["rf_trees"] = opts.forest.n_trees;
  j["rf_max_features"] = opts.forest.max_features > 0 ? Json(opts.forest.max_features) : Json("ceil(d/3)");
  j["rf_min_leaf"] = opts.forest.min_leaf;
  j["rf_bootstrap"] = opts.forest.bootstrap;
  j["standardize"] = "ols,svr";
  return j;
}

inline Json to_json(const EstimatorReport& r) {
  Json j;
  j["estimator"] = std::string(to_string(r.estimator));
  j["feature_set"] = std::string(to_string(r.feature_set));
  j["features"] = r.features;
  j["train_rows"] = r.train_rows;
  j["test_rows"] = r.test_rows;
  j["r2"] = r.r2;
  j["r2_mean"] = r.r2_mean;
  j["r2_std"] = r.r2_std;
  j["pearson_r"] = r.pearson_r;
  j["pearson_mean"] = r.pearson_mean;
  if (!r.importance_mean.empty()) {
    Json imp = Json::object();
    for (std::size_t f = 0; f < r.features.size(); ++f) {
      imp[r.features[f]] = {{"mean", r.importance_mean[f]}, {"std", r.importance_std[f]}};
    }
    j["importance"] = std::move(imp);
  }
  return j;
}

// Table-1 layout: one row per estimator with an R^2 cell per feature set,
// then one row per feature with RF importances per set (blank where the
// feature is not a member), then the hyperparameters used.
inline void write_table1_csv(const std::vector<EstimatorReport>& reports, const EvaluateOptions& opts,
                             const SplitProtocol& protocol, std::ostream& out) {
  std::vector<FeatureSetId> sets;
  std::vector<EstimatorTag> tags;
  for (const auto& r : reports) {
    if (std::find(sets.begin(), sets.end(), r.feature_set) == sets.end()) sets.push_back(r.feature_set);
    if (std::find(tags.begin(), tags.end(), r.estimator) == tags.end()) tags.push_back(r.estimator);
  }
  auto find = [&](EstimatorTag t, FeatureSetId s) -> const EstimatorReport* {
    for (const auto& r : reports) {
      if (r.estimator == t && r.feature_set == s) return &r;
    }
    return nullptr;
  };
  out << "row";
  for (auto s : sets) out << ',' << to_string(s);
  out << '\n';
  for (auto t : tags) {
    out << "r2_" << to_string(t);
    for (auto s : sets) {
      out << ',';
      if (const auto* r = find(t, s)) out << mean_pm_std(r->r2_mean, r->r2_std);
    }
    out << '\n';
  }
  for (auto t : tags) {
    out << "pearson_" << to_string(t);
    for (auto s : sets) {
      out << ',';
      if (const auto* r = find(t, s)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", r->pearson_mean);
        out << buf;
      }
    }
    out << '\n';
  }
  if (std::find(tags.begin(), tags.end(), EstimatorTag::rf) != tags.end()) {
    for (auto name : kFeatureNames) {
      out << name;
      for (auto s : sets) {
        out << ',';
        const auto* r = find(EstimatorTag::rf, s);
        if (r == nullptr) continue;
        for (std::size_t f = 0; f < r->features.size(); ++f) {
          if (r->features[f] == name) out << mean_pm_std(r->importance_mean[f], r->importance_std[f]);
        }
      }
      out << '\n';
    }
  }
  const Json params = hyperparameters_json(opts, protocol);
  for (const auto& [key, value] : params.items()) {
    if (key == "seeds") continue;
    out << "param_" << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
}

inline Json reports_json(const std::vector<EstimatorReport>& reports, const EvaluateOptions& opts,
                         const SplitProtocol& protocol, std::size_t usable, std::size_t skipped) {
  Json j;
  j["usable_records"] = usable;
  j["excluded_records"] = skipped;
  j["hyperparameters"] = hyperparameters_json(opts, protocol);
  Json list = Json::array();
  for (const auto& r : reports) list.push_back(to_json(r));
  j["reports"] = std::move(list);
  return j;
}

}  // namespace sparsenet
