#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sparsenet/dag.hpp"
#include "sparsenet/data.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/records.hpp"
#include "sparsenet/rgg.hpp"
#include "sparsenet/snn.hpp"
#include "sparsenet/stats.hpp"

namespace sparsenet {

// Relative weights of each generator kind in a dataset.
struct GeneratorMix {
  double ws = 0.5;
  double ba = 0.5;
  double er = 0.0;

  GeneratorKind pick(double u) const {
    const double total = ws + ba + er;
    const double x = u * total;
    if (x < ws) return GeneratorKind::watts_strogatz;
    if (x < ws + ba) return GeneratorKind::barabasi_albert;
    return GeneratorKind::erdos_renyi;
  }
};

// Parses "ws=0.5,ba=0.5[,er=0]".
inline GeneratorMix parse_mix(const std::string& text) {
  GeneratorMix mix{0.0, 0.0, 0.0};
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("mix entry '" + item + "' is not key=weight");
    const std::string key = item.substr(0, eq);
    char* end = nullptr;
    const std::string value_text = item.substr(eq + 1);
    const double w = std::strtod(value_text.c_str(), &end);
    if (value_text.empty() || *end != '\0' || !(w >= 0.0)) throw ArgumentError("mix weight '" + value_text + "' is invalid");
    if (key == "ws") mix.ws = w;
    else if (key == "ba") mix.ba = w;
    else if (key == "er") mix.er = w;
    else throw ArgumentError("mix key '" + key + "' unknown (expected ws, ba or er)");
    pos = comma + 1;
  }
  if (mix.ws + mix.ba + mix.er <= 0.0) throw ArgumentError("mix weights sum to zero");
  return mix;
}

// Everything a dataset build holds fixed across graphs.
struct ExperimentConfig {
  TrainConfig train;
  SinkPolicy sink_policy = SinkPolicy::all_sinks;
  Activation activation = Activation::relu;
  SamplingRanges ranges;
  GeneratorMix mix;
  std::uint64_t seed = 1;
  int max_generation_retries = 100;
  bool record_timing = false;
};

// Mini profile: small graphs, 3 epochs on a 10k-image training subset.
inline ExperimentConfig mini_profile() {
  ExperimentConfig c;
  c.ranges.n_min = 20;
  c.ranges.n_max = 60;
  c.train.epochs = 3;
  c.train.train_n = 10000;
  c.train.val_n = 2000;
  c.train.test_n = 2000;
  return c;
}

// Full replication profile: n in [50, 500], full MNIST.
inline ExperimentConfig full_profile() {
  ExperimentConfig c;
  c.ranges.n_min = 50;
  c.ranges.n_max = 500;
  c.train.epochs = 5;
  c.train.train_n = 55000;
  c.train.val_n = 5000;
  c.train.test_n = 10000;
  return c;
}

// Prepared data shared read-only by all jobs.
struct ExperimentData {
  LabeledDataset dataset;  // already split
  std::string source;      // "mnist" or "synthetic"
};

inline ExperimentData prepare_data(const std::optional<std::filesystem::path>& mnist_dir, const TrainConfig& train,
                                   std::uint64_t split_seed) {
  ExperimentData data;
  if (mnist_dir) {
    data.dataset = split(load_mnist(*mnist_dir), train.train_n, train.val_n, train.test_n, split_seed);
    data.source = "mnist";
  } else {
    const std::size_t total = train.train_n + train.val_n + train.test_n;
    data.dataset = split(synthetic_digits(total, split_seed), train.train_n, train.val_n, train.test_n, split_seed);
    data.source = "synthetic";
  }
  return data;
}

// Seeds for graph `graph_id` of a dataset with master seed `seed`.
struct JobSeeds {
  GeneratorKind kind;
  std::uint64_t spec_seed;
  std::uint64_t train_seed;
};

inline JobSeeds job_seeds(const ExperimentConfig& cfg, std::size_t graph_id) {
  const Rng job = Rng(cfg.seed).split(graph_id);
  Rng kind_rng = job.split(1);
  Rng spec_rng = job.split(2);
  Rng train_rng = job.split(3);
  return {cfg.mix.pick(kind_rng.uniform01()), spec_rng.next_u64(), train_rng.next_u64()};
}

// generate -> orient -> layer -> featurize -> embed -> train. Training
// divergence produces a record with status "diverged" and no accuracies;
// every other failure is rethrown nested inside a runtime_error naming the
// graph id.
inline ExperimentRecord run_one(const GeneratorSpec& spec, std::uint64_t train_seed, const ExperimentConfig& cfg,
                                const ExperimentData& data, std::size_t graph_id = 0) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.graph_id = graph_id;
  try {
    auto sample = generate_connected_sample(spec, cfg.max_generation_retries);
    rec.generator = sample.spec;
    rec.generation_attempts = sample.attempts;
    const LayeredDag dag = layer_index(orient(sample.graph));
    rec.features = feature_vector(sample.graph, dag);
    rec.sink_policy = cfg.sink_policy;
    rec.activation = cfg.activation;
    rec.train_config_digest = cfg.train.digest();
    rec.train_seed = train_seed;
    rec.data_source = data.source;

    auto net = embed<float>(dag, data.dataset.cols, 10, cfg.sink_policy, cfg.activation);
    TrainConfig train = cfg.train;
    train.seed = train_seed;
    try {
      const TrainResult result = train_and_eval(net, data.dataset, train);
      rec.val_accuracy = result.val_accuracy;
      rec.test_accuracy = result.test_accuracy;
      rec.status = "ok";
    } catch (const TrainingDivergedError&) {
      rec.status = "diverged";
    }
  } catch (const std::exception&) {
    std::throw_with_nested(std::runtime_error("graph " + std::to_string(graph_id)));
  }
  if (cfg.record_timing) {
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

inline ExperimentRecord run_job(const ExperimentConfig& cfg, const ExperimentData& data, std::size_t graph_id) {
  const JobSeeds seeds = job_seeds(cfg, graph_id);
  const GeneratorSpec spec = sample_spec(seeds.spec_seed, seeds.kind, cfg.ranges);
  return run_one(spec, seeds.train_seed, cfg, data, graph_id);
}

struct DatasetSummary {
  std::size_t records = 0;
  std::size_t diverged = 0;
  std::map<GeneratorKind, std::size_t> per_kind;
  // Table-2 order: the 25 features, then val/test accuracy over usable records.
  std::vector<std::pair<std::string, Summary>> rows;
};

inline DatasetSummary summarize_records(const std::vector<ExperimentRecord>& records) {
  DatasetSummary s;
  s.records = records.size();
  std::vector<double> column(records.size());
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    for (std::size_t r = 0; r < records.size(); ++r) column[r] = records[r].features[i];
    s.rows.emplace_back(std::string(kFeatureNames[i]), summarize(column));
  }
  std::vector<double> val, test;
  for (const auto& r : records) {
    ++s.per_kind[r.generator.kind];
    if (!r.usable()) {
      ++s.diverged;
      continue;
    }
    val.push_back(*r.val_accuracy);
    test.push_back(*r.test_accuracy);
  }
  s.rows.emplace_back("val_accuracy", summarize(val));
  s.rows.emplace_back("test_accuracy", summarize(test));
  return s;
}

inline void write_summary_csv(const DatasetSummary& s, std::ostream& out) {
  out << "property,min,mean,max,std\n";
  for (const auto& [name, sm] : s.rows) {
    out << name << ',' << format_double(sm.min) << ',' << format_double(sm.mean) << ',' << format_double(sm.max)
        << ',' << format_double(sm.std) << '\n';
  }
}

struct BuildOptions {
  std::size_t count = 1;
  unsigned workers = 1;
  bool keep_partial = false;
};

// Runs graph ids 0..count-1 on a worker pool and appends records to `out_path`
// strictly in graph-id order as soon as a contiguous prefix is complete. On a
// failed job the partial file is removed unless keep_partial is set.
inline DatasetSummary build_dataset(const ExperimentConfig& cfg, const ExperimentData& data,
                                    const std::filesystem::path& out_path, const BuildOptions& opts) {
  if (opts.count < 1) throw ArgumentError("build_dataset: count must be >= 1");
  cfg.train.validate();
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(0, "cannot open " + out_path.string() + " for writing");

  std::vector<std::optional<ExperimentRecord>> done(opts.count);
  std::vector<ExperimentRecord> written;
  written.reserve(opts.count);
  std::mutex mutex;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t id = next++; id < opts.count && !stop; id = next++) {
      try {
        ExperimentRecord rec = run_job(cfg, data, id);
        std::lock_guard lock(mutex);
        done[id] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      cv.notify_one();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(opts.count)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);

  std::size_t flushed = 0;
  {
    std::unique_lock lock(mutex);
    while (flushed < opts.count && !failure) {
      cv.wait(lock, [&] { return failure || (flushed < opts.count && done[flushed].has_value()); });
      while (flushed < opts.count && done[flushed]) {
        out << to_json_line(*done[flushed]);
        written.push_back(std::move(*done[flushed]));
        done[flushed].reset();
        ++flushed;
      }
      out.flush();
    }
  }
  for (auto& th : pool) th.join();
  out.close();
  if (failure) {
    if (!opts.keep_partial) {
      std::error_code ec;
      std::filesystem::remove(out_path, ec);
    }
    std::rethrow_exception(failure);
  }
  return summarize_records(written);
}

}  // namespace sparsenet
