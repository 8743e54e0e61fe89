#pragma once

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsenet/dag.hpp"
#include "sparsenet/data.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/estimators/evaluate.hpp"
#include "sparsenet/experiment.hpp"
#include "sparsenet/graph.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/records.hpp"
#include "sparsenet/report.hpp"
#include "sparsenet/rgg.hpp"
#include "sparsenet/snn.hpp"

namespace sparsenet::cli {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to `path`, or to `fallback` when path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(0, "cannot open " + path + " for writing");
  body(out);
}

struct Classified {
  const char* kind;
  int code;
  std::string message;
};

inline Classified classify_one(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return {"argument_error", kUsage, {}};
  if (dynamic_cast<const ParseError*>(&e)) return {"parse_error", kData, {}};
  if (dynamic_cast<const FormatError*>(&e)) return {"format_error", kData, {}};
  if (dynamic_cast<const SchemaError*>(&e)) return {"schema_error", kData, {}};
  if (dynamic_cast<const StructuralError*>(&e)) return {"structural_error", kData, {}};
  if (dynamic_cast<const GenerationError*>(&e)) return {"generation_error", kData, {}};
  if (dynamic_cast<const EmbeddingError*>(&e)) return {"embedding_error", kData, {}};
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return {"training_diverged", kNumeric, {}};
  if (dynamic_cast<const FittingError*>(&e)) return {"fitting_error", kNumeric, {}};
  if (dynamic_cast<const std::invalid_argument*>(&e)) return {"argument_error", kUsage, {}};
  return {"error", kData, {}};
}

// The innermost nested exception decides the category; messages are joined
// outermost first.
inline Classified classify(const std::exception& e) {
  Classified c = classify_one(e);
  c.message = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    Classified deeper = classify(inner);
    deeper.message = c.message + ": " + deeper.message;
    return deeper;
  } catch (...) {
  }
  return c;
}

inline void report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  Json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace detail

struct GlobalOptions {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string format = "json";
};

struct DataOptions {
  std::string mnist_dir;
  bool synthetic = false;

  void add(CLI::App* sub) {
    sub->add_option("--mnist-dir", mnist_dir, "Directory with the four MNIST IDX files (fallback: SPARSENET_MNIST_DIR)");
    sub->add_flag("--synthetic", synthetic, "Use the built-in synthetic digit set instead of MNIST");
  }

  std::optional<std::filesystem::path> resolve() const {
    if (synthetic) return std::nullopt;
    auto dir = resolve_mnist_dir(mnist_dir);
    if (!dir) throw ArgumentError("no MNIST directory: pass --mnist-dir, set SPARSENET_MNIST_DIR, or use --synthetic");
    return dir;
  }
};

inline void print_feature_vector(const FeatureVector& fv, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << (i ? "," : "") << kFeatureNames[i];
    out << '\n';
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << (i ? "," : "") << format_double(fv[i]);
    out << '\n';
  } else if (format == "text") {
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << kFeatureNames[i] << ' ' << format_double(fv[i]) << '\n';
  } else {
    Json j;
    for (std::size_t i = 0; i < kNumFeatures; ++i) j[std::string(kFeatureNames[i])] = fv[i];
    out << j.dump() << '\n';
  }
}

inline void print_summary(const DatasetSummary& s, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    write_summary_csv(s, out);
    return;
  }
  if (format == "text") {
    out << "records " << s.records << "\ndiverged " << s.diverged << '\n';
    for (const auto& [kind, count] : s.per_kind) out << "kind_" << to_string(kind) << ' ' << count << '\n';
    for (const auto& [name, sm] : s.rows) {
      out << name << " min=" << format_double(sm.min) << " mean=" << format_double(sm.mean)
          << " max=" << format_double(sm.max) << " std=" << format_double(sm.std) << '\n';
    }
    return;
  }
  Json j;
  j["records"] = s.records;
  j["diverged"] = s.diverged;
  Json kinds = Json::object();
  for (const auto& [kind, count] : s.per_kind) kinds[std::string(to_string(kind))] = count;
  j["per_kind"] = std::move(kinds);
  Json rows = Json::array();
  for (const auto& [name, sm] : s.rows) {
    rows.push_back({{"property", name}, {"min", sm.min}, {"mean", sm.mean}, {"max", sm.max}, {"std", sm.std}});
  }
  j["table2"] = std::move(rows);
  out << j.dump() << '\n';
}

// Parses argv and runs one subcommand. Regular output goes to `out`;
// diagnostics, the config digest and errors go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-graph sparse networks: generate, train, featurize, and predict accuracy from structure"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master random seed")->capture_default_str();
  app.add_option("--workers", global.workers, "Worker threads for dataset building and estimator fitting")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--format", global.format, "Output format for summaries and features")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv", "text"}));

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a connected random graph and write its edge list");
  std::string gen_kind = "ws";
  GeneratorSpec gen_spec;
  gen_spec.n = 100;
  gen_spec.ws_k = 8;
  gen_spec.ws_p = 0.3;
  gen_spec.ba_m = 3;
  gen_spec.er_p = 0.1;
  int gen_retries = 100;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "Generator: ws, ba or er")->capture_default_str();
  gen->add_option("--n", gen_spec.n, "Number of vertices")->capture_default_str();
  gen->add_option("--k", gen_spec.ws_k, "Watts-Strogatz ring degree (even)")->capture_default_str();
  gen->add_option("--p", gen_spec.ws_p, "Watts-Strogatz rewiring probability")->capture_default_str();
  gen->add_option("--m", gen_spec.ba_m, "Barabasi-Albert edges per new vertex")->capture_default_str();
  gen->add_option("--er-p", gen_spec.er_p, "Erdos-Renyi edge probability")->capture_default_str();
  gen->add_option("--max-retries", gen_retries, "Resampling budget for a connected graph")->capture_default_str();
  gen->add_option("--out", gen_out, "Edge-list output file (default stdout)");

  // orient
  auto* ori = app.add_subcommand("orient", "Orient an edge list into a layered DAG");
  std::string ori_graph, ori_out;
  ori->add_option("--graph", ori_graph, "Edge-list input file")->required();
  ori->add_option("--out", ori_out, "Layered-DAG output file (default stdout)");

  // features
  auto* feat = app.add_subcommand("features", "Compute the 25 structural properties of an edge list");
  std::string feat_graph;
  feat->add_option("--graph", feat_graph, "Edge-list input file")->required();

  // train
  auto* trn = app.add_subcommand("train", "Embed a graph as a sparse network and train it");
  std::string trn_graph, trn_snapshot, trn_policy = "all_sinks", trn_act = "relu";
  TrainConfig trn_cfg;
  trn_cfg.train_n = 10000;
  trn_cfg.val_n = 5000;
  trn_cfg.test_n = 10000;
  DataOptions trn_data;
  trn->add_option("--graph", trn_graph, "Edge-list input file")->required();
  trn->add_option("--epochs", trn_cfg.epochs, "Training epochs")->capture_default_str();
  trn->add_option("--batch-size", trn_cfg.batch_size, "Mini-batch size")->capture_default_str();
  trn->add_option("--lr", trn_cfg.learning_rate, "Learning rate")->capture_default_str();
  trn->add_option("--momentum", trn_cfg.momentum, "SGD momentum")->capture_default_str();
  trn->add_option("--train-n", trn_cfg.train_n, "Training images")->capture_default_str();
  trn->add_option("--val-n", trn_cfg.val_n, "Validation images")->capture_default_str();
  trn->add_option("--test-n", trn_cfg.test_n, "Test images")->capture_default_str();
  trn->add_option("--sink-policy", trn_policy, "all_sinks or last_layer_only")->capture_default_str();
  trn->add_option("--activation", trn_act, "relu or tanh")->capture_default_str();
  trn->add_option("--snapshot", trn_snapshot, "Write the trained network to this file");
  trn_data.add(trn);

  // dataset
  auto* ds = app.add_subcommand("dataset", "Build a dataset of graph records with trained accuracies");
  std::size_t ds_count = 10;
  std::string ds_mix = "ws=0.5,ba=0.5", ds_out, ds_profile = "mini", ds_csv, ds_summary;
  std::string ds_policy = "all_sinks", ds_act = "relu";
  std::optional<int> ds_epochs;
  std::optional<std::size_t> ds_train_n, ds_val_n, ds_test_n, ds_n_min, ds_n_max;
  bool ds_keep_partial = false, ds_timing = false;
  DataOptions ds_data;
  ds->add_option("--count", ds_count, "Number of graphs")->capture_default_str()->check(CLI::PositiveNumber);
  ds->add_option("--mix", ds_mix, "Generator weights, e.g. ws=0.5,ba=0.5")->capture_default_str();
  ds->add_option("--out", ds_out, "JSON-lines output file")->required();
  ds->add_option("--profile", ds_profile, "mini or full")->capture_default_str()->check(CLI::IsMember({"mini", "full"}));
  ds->add_option("--csv", ds_csv, "Also export features and accuracies as CSV");
  ds->add_option("--summary", ds_summary, "Write the per-property summary table as CSV");
  ds->add_option("--sink-policy", ds_policy, "all_sinks or last_layer_only")->capture_default_str();
  ds->add_option("--activation", ds_act, "relu or tanh")->capture_default_str();
  ds->add_option("--epochs", ds_epochs, "Override the profile's epoch count");
  ds->add_option("--train-n", ds_train_n, "Override the profile's training images");
  ds->add_option("--val-n", ds_val_n, "Override the profile's validation images");
  ds->add_option("--test-n", ds_test_n, "Override the profile's test images");
  ds->add_option("--n-min", ds_n_min, "Override the profile's smallest vertex count");
  ds->add_option("--n-max", ds_n_max, "Override the profile's largest vertex count");
  ds->add_flag("--keep-partial", ds_keep_partial, "Keep the partial output file when a record fails");
  ds->add_flag("--timing", ds_timing, "Record wall_time_s per graph (makes output nondeterministic)");
  ds_data.add(ds);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit accuracy predictors on a dataset and report R^2");
  std::string fit_dataset, fit_estimators = "ols,svm_lin,svm_rbf,svm_pol,rf", fit_sets = "omega,np,op,var,small,min";
  std::string fit_out, fit_target = "test";
  SplitProtocol fit_protocol;
  EvaluateOptions fit_opts;
  fit->add_option("--dataset", fit_dataset, "Dataset file (.jsonl records or .csv)")->required();
  fit->add_option("--estimators", fit_estimators, "Comma list of ols, svm_lin, svm_rbf, svm_pol, rf")->capture_default_str();
  fit->add_option("--sets", fit_sets, "Comma list of omega, np, op, var, small, min")->capture_default_str();
  fit->add_option("--repetitions", fit_protocol.repetitions, "Random splits per estimator and set")->capture_default_str();
  fit->add_option("--train-ratio", fit_protocol.train_ratio, "Training share of each split")->capture_default_str();
  fit->add_option("--target", fit_target, "Accuracy to predict: test or val")
      ->capture_default_str()
      ->check(CLI::IsMember({"test", "val"}));
  fit->add_option("--svr-c", fit_opts.svr.c, "SVR box constraint C")->capture_default_str();
  fit->add_option("--svr-epsilon", fit_opts.svr.epsilon, "SVR epsilon tube")->capture_default_str();
  fit->add_option("--svr-gamma", fit_opts.svr.gamma, "SVR kernel gamma (0: 1/(d*var))")->capture_default_str();
  fit->add_option("--svr-degree", fit_opts.svr.degree, "Polynomial kernel degree")->capture_default_str();
  fit->add_option("--rf-trees", fit_opts.forest.n_trees, "Trees per forest")->capture_default_str();
  fit->add_option("--rf-max-features", fit_opts.forest.max_features, "Features per split (0: ceil(d/3))")
      ->capture_default_str();
  fit->add_option("--rf-min-leaf", fit_opts.forest.min_leaf, "Minimum samples per leaf")->capture_default_str();
  fit->add_option("--min-records", fit_opts.min_records, "Minimum usable records")->capture_default_str();
  fit->add_option("--out", fit_out, "Output prefix: writes PREFIX.csv and PREFIX.json (default: CSV on stdout)");

  // report
  auto* rep = app.add_subcommand("report", "Emit plot-ready tables from a dataset");
  std::string rep_dataset, rep_kind = "table2", rep_feature = "number_edges", rep_y = "test_accuracy", rep_out;
  std::size_t rep_bins = 20;
  bool rep_svg = false;
  rep->add_option("--dataset", rep_dataset, "JSON-lines dataset file")->required();
  rep->add_option("--kind", rep_kind, "histogram, jointplot or table2")
      ->capture_default_str()
      ->check(CLI::IsMember({"histogram", "jointplot", "table2"}));
  rep->add_option("--feature", rep_feature, "Property for histogram / x axis of jointplot")->capture_default_str();
  rep->add_option("--y", rep_y, "y axis of jointplot")->capture_default_str();
  rep->add_option("--bins", rep_bins, "Histogram bins")->capture_default_str()->check(CLI::PositiveNumber);
  rep->add_option("--out", rep_out, "Output prefix (default: main CSV on stdout)");
  rep->add_flag("--svg", rep_svg, "Also write PREFIX.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::Success&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::report_error(err, "usage_error", kUsage, e.what());
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  {
    std::string digest_text = sub->get_name() + "\n" + app.config_to_str(true, false);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(digest_text)));
    err << "config_digest=" << buf << '\n';
  }

  try {
    const std::string name = sub->get_name();
    if (name == "generate") {
      gen_spec.kind = parse_generator_kind(gen_kind);
      gen_spec.seed = global.seed;
      const Graph g = generate_connected(gen_spec, gen_retries);
      detail::emit(gen_out, out, [&](std::ostream& o) { write_edge_list(g, o); });
    } else if (name == "orient") {
      const Graph g = read_edge_list(detail::read_text(ori_graph));
      const LayeredDag d = layer_index(orient(g));
      detail::emit(ori_out, out, [&](std::ostream& o) { write_layered_dag(d, o); });
    } else if (name == "features") {
      const Graph g = read_edge_list(detail::read_text(feat_graph));
      print_feature_vector(feature_vector(g), global.format, out);
    } else if (name == "train") {
      const Graph g = read_edge_list(detail::read_text(trn_graph));
      if (!is_connected(g)) throw StructuralError("train: graph is not connected");
      const LayeredDag d = layer_index(orient(g));
      trn_cfg.seed = global.seed;
      trn_cfg.validate();
      const ExperimentData data = prepare_data(trn_data.resolve(), trn_cfg, global.seed);
      auto net = embed<float>(d, data.dataset.cols, 10, parse_sink_policy(trn_policy), parse_activation(trn_act));
      const TrainResult r = train_and_eval(net, data.dataset, trn_cfg);
      if (!trn_snapshot.empty()) {
        detail::emit(trn_snapshot, out, [&](std::ostream& o) { write_snapshot(net, o); });
      }
      Json j;
      j["data_source"] = data.source;
      j["num_parameters"] = net.num_parameters();
      j["train_config_digest"] = trn_cfg.digest();
      j["val_accuracy"] = r.val_accuracy;
      j["test_accuracy"] = r.test_accuracy;
      j["loss_curve"] = r.loss_curve;
      out << j.dump() << '\n';
    } else if (name == "dataset") {
      ExperimentConfig cfg = ds_profile == "full" ? full_profile() : mini_profile();
      cfg.seed = global.seed;
      cfg.mix = parse_mix(ds_mix);
      cfg.sink_policy = parse_sink_policy(ds_policy);
      cfg.activation = parse_activation(ds_act);
      cfg.record_timing = ds_timing;
      if (ds_epochs) cfg.train.epochs = *ds_epochs;
      if (ds_train_n) cfg.train.train_n = *ds_train_n;
      if (ds_val_n) cfg.train.val_n = *ds_val_n;
      if (ds_test_n) cfg.train.test_n = *ds_test_n;
      if (ds_n_min) cfg.ranges.n_min = *ds_n_min;
      if (ds_n_max) cfg.ranges.n_max = *ds_n_max;
      cfg.train.validate();
      const ExperimentData data = prepare_data(ds_data.resolve(), cfg.train, global.seed);
      const DatasetSummary s = build_dataset(cfg, data, ds_out, {ds_count, global.workers, ds_keep_partial});
      if (!ds_csv.empty()) {
        const auto records = read_records(ds_out);
        detail::emit(ds_csv, out, [&](std::ostream& o) { write_records_csv(records, o); });
      }
      if (!ds_summary.empty()) detail::emit(ds_summary, out, [&](std::ostream& o) { write_summary_csv(s, o); });
      print_summary(s, global.format, out);
    } else if (name == "fit") {
      fit_opts.threads = global.workers;
      fit_opts.forest.seed = global.seed;
      std::vector<EstimatorTag> tags;
      for (const auto& t : detail::split_list(fit_estimators)) tags.push_back(parse_estimator(t));
      std::vector<FeatureSetId> sets;
      for (const auto& s : detail::split_list(fit_sets)) sets.push_back(parse_feature_set(s));
      if (tags.empty() || sets.empty()) throw ArgumentError("fit: need at least one estimator and one feature set");
      const FeatureTable table = load_feature_table(fit_dataset, fit_target == "val");
      std::vector<EstimatorReport> reports;
      for (auto t : tags) {
        for (auto s : sets) reports.push_back(evaluate(table, t, s, fit_protocol, fit_opts));
      }
      const auto usable = static_cast<std::size_t>(table.y.size());
      if (fit_out.empty()) {
        write_table1_csv(reports, fit_opts, fit_protocol, out);
      } else {
        detail::emit(fit_out + ".csv", out, [&](std::ostream& o) { write_table1_csv(reports, fit_opts, fit_protocol, o); });
        detail::emit(fit_out + ".json", out, [&](std::ostream& o) {
          o << reports_json(reports, fit_opts, fit_protocol, usable, table.skipped).dump(2) << '\n';
        });
      }
    } else if (name == "report") {
      const auto records = read_records(rep_dataset);
      const ReportKind kind = parse_report_kind(rep_kind);
      const std::string main_csv = rep_out.empty() ? "" : rep_out + ".csv";
      if (kind == ReportKind::table2) {
        const DatasetSummary s = summarize_records(records);
        detail::emit(main_csv, out, [&](std::ostream& o) { write_summary_csv(s, o); });
      } else if (kind == ReportKind::histogram) {
        const Histogram h = histogram(column_values(records, rep_feature), rep_bins);
        detail::emit(main_csv, out, [&](std::ostream& o) { write_histogram_csv(h, o); });
        if (rep_svg && !rep_out.empty()) {
          detail::emit(rep_out + ".svg", out, [&](std::ostream& o) { write_histogram_svg(h, rep_feature, o); });
        }
      } else {
        const auto pts = column_pairs(records, rep_feature, rep_y);
        std::vector<double> xs, ys;
        for (const auto& [x, y] : pts) {
          xs.push_back(x);
          ys.push_back(y);
        }
        detail::emit(main_csv, out, [&](std::ostream& o) { write_points_csv(pts, rep_feature, rep_y, o); });
        if (!rep_out.empty()) {
          detail::emit(rep_out + "_x_hist.csv", out, [&](std::ostream& o) { write_histogram_csv(histogram(xs, rep_bins), o); });
          detail::emit(rep_out + "_y_hist.csv", out, [&](std::ostream& o) { write_histogram_csv(histogram(ys, rep_bins), o); });
          if (rep_svg) {
            detail::emit(rep_out + ".svg", out, [&](std::ostream& o) { write_scatter_svg(pts, rep_feature, rep_y, o); });
          }
        }
      }
    }
  } catch (const std::exception& e) {
    const auto c = detail::classify(e);
    detail::report_error(err, c.kind, c.code, c.message);
    return c.code;
  }
  return kOk;
}

}  // namespace sparsenet::cli
