#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "sparsenet/cli.hpp"

using namespace sparsenet;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "sparsenet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json error_json(const Run& r) {
  std::istringstream in(r.err);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '{') last = line;
  }
  return Json::parse(last);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("sparsenet_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }
  std::filesystem::path dir_;
};

const std::vector<std::string> kTinyTrain{"--synthetic", "--epochs", "1", "--train-n", "300", "--val-n", "100", "--test-n", "100"};

}  // namespace

TEST_F(CliTest, GenerateFeaturesOrient) {
  const auto g = run({"--seed", "4", "generate", "--kind", "watts_strogatz", "--n", "20", "--k", "4", "--p", "0.2", "--out", path("g.txt")});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_NE(g.err.find("config_digest="), std::string::npos);
  const auto f = run({"features", "--graph", path("g.txt")});
  ASSERT_EQ(f.code, 0) << f.err;
  const Json j = Json::parse(f.out);
  EXPECT_EQ(j["number_vertices"], 20);
  EXPECT_EQ(j["number_edges"], 40);
  const auto o = run({"orient", "--graph", path("g.txt")});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream in(o.out);
  EXPECT_NO_THROW(read_layered_dag(in));
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  for (int i = 0; i < 2; ++i) {
    const auto r = run({"--seed", "9", "generate", "--kind", "barabasi_albert", "--n", "30", "--m", "2", "--out", path("g" + std::to_string(i))});
    ASSERT_EQ(r.code, 0);
  }
  std::ifstream a(path("g0")), b(path("g1"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());

  std::vector<std::string> ds{"--seed", "2", "dataset", "--count", "3", "--n-min", "20", "--n-max", "25"};
  ds.insert(ds.end(), kTinyTrain.begin(), kTinyTrain.end());
  auto first = ds;
  first.insert(first.end(), {"--out", path("d0.jsonl")});
  auto second = ds;
  second.insert(second.end(), {"--out", path("d1.jsonl")});
  const auto r0 = run(first), r1 = run(second);
  ASSERT_EQ(r0.code, 0) << r0.err;
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_EQ(r0.out, r1.out);
  std::ifstream c(path("d0.jsonl")), d(path("d1.jsonl"));
  std::stringstream sc, sd;
  sc << c.rdbuf();
  sd << d.rdbuf();
  EXPECT_EQ(sc.str(), sd.str());
}

TEST_F(CliTest, HelpListsFlags) {
  const auto r = run({"dataset", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--count", "--mix", "--out", "--profile", "--sink-policy", "--mnist-dir"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"generate", "orient", "features", "train", "dataset", "fit", "report"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"generate", "--kind", "nope", "--n", "10"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const auto r = run({"dataset", "--out", path("x.jsonl"), "--mix", "ws=banana", "--synthetic"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_json(r)["error"], "argument_error");
}

TEST_F(CliTest, DataErrorsExitTwo) {
  const auto missing = run({"features", "--graph", path("absent.txt")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(error_json(missing)["error"], "format_error");

  write("bad.txt", "3 2\n0 1\n1 x\n");
  const auto bad = run({"features", "--graph", path("bad.txt")});
  EXPECT_EQ(bad.code, 2);
  const Json e = error_json(bad);
  EXPECT_EQ(e["error"], "parse_error");
  EXPECT_EQ(e["exit_code"], 2);

  write("split.txt", "4 2\n0 1\n2 3\n");
  std::vector<std::string> args{"train", "--graph", path("split.txt")};
  args.insert(args.end(), kTinyTrain.begin(), kTinyTrain.end());
  EXPECT_EQ(error_json(run(args))["error"], "structural_error");

  const auto gen = run({"generate", "--kind", "erdos_renyi", "--n", "30", "--er-p", "0.001", "--max-retries", "2"});
  EXPECT_EQ(gen.code, 2);
  EXPECT_EQ(error_json(gen)["error"], "generation_error");
}

TEST_F(CliTest, DivergenceExitsThree) {
  ASSERT_EQ(run({"generate", "--kind", "watts_strogatz", "--n", "20", "--k", "4", "--p", "0.1", "--out", path("g.txt")}).code, 0);
  std::vector<std::string> args{"train", "--graph", path("g.txt"), "--lr", "1e38"};
  args.insert(args.end(), kTinyTrain.begin(), kTinyTrain.end());
  args[args.size() - 7] = "3";  // epochs
  const auto r = run(args);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_json(r)["error"], "training_diverged");
}

TEST_F(CliTest, ReportSummaryAndHistogram) {
  std::vector<std::string> ds{"dataset", "--count", "4", "--n-min", "20", "--n-max", "25", "--out", path("d.jsonl")};
  ds.insert(ds.end(), kTinyTrain.begin(), kTinyTrain.end());
  ASSERT_EQ(run(ds).code, 0);

  const auto t2 = run({"report", "--dataset", path("d.jsonl"), "--kind", "table2"});
  ASSERT_EQ(t2.code, 0) << t2.err;
  EXPECT_EQ(t2.out.substr(0, t2.out.find('\n')), "property,min,mean,max,std");
  EXPECT_EQ(std::count(t2.out.begin(), t2.out.end(), '\n'), static_cast<long>(kNumFeatures + 3));

  const auto h = run({"report", "--dataset", path("d.jsonl"), "--kind", "histogram", "--feature", "number_edges", "--bins", "5"});
  ASSERT_EQ(h.code, 0) << h.err;
  std::istringstream in(h.out);
  std::string line;
  std::getline(in, line);
  std::size_t total = 0, bins = 0;
  while (std::getline(in, line)) {
    total += std::stoul(line.substr(line.rfind(',') + 1));
    ++bins;
  }
  EXPECT_EQ(bins, 5u);
  EXPECT_EQ(total, 4u);

  const auto jp = run({"report", "--dataset", path("d.jsonl"), "--kind", "jointplot", "--out", path("jp"), "--svg"});
  ASSERT_EQ(jp.code, 0) << jp.err;
  for (const char* f : {"jp.csv", "jp_x_hist.csv", "jp_y_hist.csv", "jp.svg"}) EXPECT_TRUE(std::filesystem::exists(path(f))) << f;

  const auto unknown = run({"report", "--dataset", path("d.jsonl"), "--kind", "histogram", "--feature", "girth"});
  EXPECT_EQ(unknown.code, 2);
  const Json e = error_json(unknown);
  EXPECT_EQ(e["error"], "schema_error");
  EXPECT_NE(e["message"].get<std::string>().find("number_sink_vertices"), std::string::npos);
}

TEST_F(CliTest, FitRejectsSmallDatasetAndMissingColumns) {
  std::string header, row;
  for (auto name : feature_set_members(FeatureSetId::min)) {
    header += std::string(name) + ",";
    row += "1,";
  }
  write("few.csv", header + "test_accuracy\n" + row + "0.1\n" + row + "0.2\n");
  const auto few = run({"fit", "--dataset", path("few.csv"), "--estimators", "ols", "--sets", "min"});
  EXPECT_EQ(few.code, 1);
  std::string many = "number_sink_vertices,test_accuracy\n";
  for (int i = 0; i < 60; ++i) many += std::to_string(i % 7) + "," + std::to_string(0.1 * (i % 7)) + "\n";
  write("many.csv", many);
  const auto missing = run({"fit", "--dataset", path("many.csv"), "--estimators", "ols", "--sets", "omega"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(error_json(missing)["error"], "schema_error");
}

TEST_F(CliTest, BinaryExitCodes) {
  auto status = [](const std::string& args) {
    const int s = std::system((std::string(SPARSENET_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--version"), 0);
  EXPECT_EQ(status(""), 1);
  EXPECT_EQ(status("features --graph " + path("nope.txt")), 2);
}
