#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "sparsenet/experiment.hpp"

using namespace sparsenet;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.ranges.n_min = 20;
  c.ranges.n_max = 30;
  c.train.epochs = 1;
  c.train.train_n = 300;
  c.train.val_n = 100;
  c.train.test_n = 100;
  return c;
}

const ExperimentData& tiny_data() {
  static const ExperimentData data = prepare_data(std::nullopt, tiny_config().train, 1);
  return data;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sparsenet_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Mix, Parse) {
  const auto m = parse_mix("ws=0.25,ba=0.75");
  EXPECT_DOUBLE_EQ(m.ws, 0.25);
  EXPECT_DOUBLE_EQ(m.ba, 0.75);
  EXPECT_DOUBLE_EQ(m.er, 0.0);
  EXPECT_EQ(m.pick(0.1), GeneratorKind::watts_strogatz);
  EXPECT_EQ(m.pick(0.5), GeneratorKind::barabasi_albert);
  EXPECT_EQ(parse_mix("er=1").pick(0.0), GeneratorKind::erdos_renyi);
  EXPECT_THROW(parse_mix("ws"), ArgumentError);
  EXPECT_THROW(parse_mix("xx=1"), ArgumentError);
  EXPECT_THROW(parse_mix("ws=-1"), ArgumentError);
  EXPECT_THROW(parse_mix("ws=0,ba=0"), ArgumentError);
}

TEST(RunOne, WattsStrogatzWithoutRewiringKeepsLattice) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::watts_strogatz;
  spec.n = 24;
  spec.ws_k = 4;
  spec.ws_p = 0.0;
  spec.seed = 3;
  const auto rec = run_one(spec, 11, tiny_config(), tiny_data());
  EXPECT_EQ(rec.features.get("number_edges"), 24.0 * 4 / 2);
  EXPECT_EQ(rec.status, "ok");
  ASSERT_TRUE(rec.test_accuracy.has_value());
  EXPECT_GE(*rec.test_accuracy, 0.0);
  EXPECT_LE(*rec.test_accuracy, 1.0);
  EXPECT_FALSE(rec.wall_time_s.has_value());
}

TEST(RunOne, DeterministicAndConsistentWithStandaloneFeatures) {
  const auto cfg = tiny_config();
  for (std::size_t id = 0; id < 4; ++id) {
    const auto a = run_job(cfg, tiny_data(), id);
    const auto b = run_job(cfg, tiny_data(), id);
    EXPECT_EQ(to_json_line(a), to_json_line(b));
    const Graph g = generate(a.generator);
    const auto fv = feature_vector(g, layer_index(orient(g)));
    for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_EQ(a.features[i], fv[i]) << kFeatureNames[i];
  }
}

TEST(RunOne, DivergenceProducesDivergedRecord) {
  auto cfg = tiny_config();
  cfg.train.learning_rate = 1e38;
  cfg.train.epochs = 3;
  const auto rec = run_job(cfg, tiny_data(), 0);
  EXPECT_EQ(rec.status, "diverged");
  EXPECT_FALSE(rec.usable());
  EXPECT_FALSE(rec.test_accuracy.has_value());
}

TEST(RunOne, FailureNamesGraphAndKeepsCause) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::erdos_renyi;
  spec.n = 30;
  spec.er_p = 0.0;
  spec.seed = 1;
  auto cfg = tiny_config();
  cfg.max_generation_retries = 3;
  try {
    run_one(spec, 1, cfg, tiny_data(), 7);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_EQ(std::string(e.what()), "graph 7");
    EXPECT_THROW(std::rethrow_if_nested(e), GenerationError);
  }
}

TEST(Dataset, ByteIdenticalAcrossWorkerCounts) {
  const auto cfg = tiny_config();
  const auto a = temp_path("w1.jsonl");
  const auto b = temp_path("w4.jsonl");
  const auto sa = build_dataset(cfg, tiny_data(), a, {6, 1, false});
  build_dataset(cfg, tiny_data(), b, {6, 4, false});
  EXPECT_EQ(slurp(a), slurp(b));

  const auto records = read_records(a);
  ASSERT_EQ(records.size(), 6u);
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i].graph_id, i);
  std::ostringstream from_build, from_file;
  write_summary_csv(sa, from_build);
  write_summary_csv(summarize_records(records), from_file);
  EXPECT_EQ(from_build.str(), from_file.str());
  EXPECT_EQ(sa.rows.size(), kNumFeatures + 2);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Dataset, RecordsRoundTrip) {
  const auto cfg = tiny_config();
  const auto path = temp_path("rt.jsonl");
  build_dataset(cfg, tiny_data(), path, {3, 1, false});
  const auto text = slurp(path);
  std::string again;
  for (const auto& r : read_records(path)) again += to_json_line(r);
  EXPECT_EQ(text, again);
  std::filesystem::remove(path);
}

TEST(Dataset, DivergedRecordsCountedAndExcluded) {
  ExperimentRecord ok;
  ok.val_accuracy = 0.5;
  ok.test_accuracy = 0.6;
  ExperimentRecord bad;
  bad.status = "diverged";
  const auto s = summarize_records({ok, bad, ok});
  EXPECT_EQ(s.records, 3u);
  EXPECT_EQ(s.diverged, 1u);
  EXPECT_DOUBLE_EQ(s.rows.back().second.mean, 0.6);

  const auto path = temp_path("div.jsonl");
  {
    std::ofstream out(path);
    out << to_json_line(ok) << to_json_line(bad);
  }
  const auto back = read_records(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_FALSE(back[1].usable());
  EXPECT_FALSE(back[1].val_accuracy.has_value());
  std::filesystem::remove(path);
}

TEST(Dataset, FailureRemovesPartialFile) {
  auto cfg = tiny_config();
  cfg.mix = parse_mix("er=1");
  cfg.ranges.er_mean_degree_min = 0.1;
  cfg.ranges.er_mean_degree_max = 0.1;
  cfg.max_generation_retries = 2;
  const auto path = temp_path("partial.jsonl");
  EXPECT_THROW(build_dataset(cfg, tiny_data(), path, {3, 2, false}), std::runtime_error);
  EXPECT_FALSE(std::filesystem::exists(path));
  EXPECT_THROW(build_dataset(cfg, tiny_data(), path, {3, 1, true}), std::runtime_error);
  EXPECT_TRUE(std::filesystem::exists(path));
  std::filesystem::remove(path);
}

TEST(Profiles, Sizes) {
  const auto mini = mini_profile();
  EXPECT_EQ(mini.ranges.n_min, 20u);
  EXPECT_EQ(mini.ranges.n_max, 60u);
  const auto full = full_profile();
  EXPECT_EQ(full.ranges.n_min, 50u);
  EXPECT_EQ(full.ranges.n_max, 500u);
  EXPECT_EQ(full.train.train_n + full.train.val_n, 60000u);
}
