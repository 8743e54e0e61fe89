#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsenet/errors.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/rgg.hpp"
#include "sparsenet/snn.hpp"

#ifndef SPARSENET_VERSION
#define SPARSENET_VERSION "0.1.0"
#endif

namespace sparsenet {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = SPARSENET_VERSION;

// One graph of a dataset: provenance, structure and the trained accuracies.
// Accuracies are empty when training diverged.
struct ExperimentRecord {
  std::size_t graph_id = 0;
  GeneratorSpec generator;
  int generation_attempts = 1;
  FeatureVector features;
  SinkPolicy sink_policy = SinkPolicy::all_sinks;
  Activation activation = Activation::relu;
  std::string train_config_digest;
  std::uint64_t train_seed = 0;
  std::string data_source;
  std::optional<double> val_accuracy;
  std::optional<double> test_accuracy;
  std::string status = "ok";
  std::optional<double> wall_time_s;
  std::string tool_version = kToolVersion;

  bool usable() const { return status == "ok" && test_accuracy.has_value() && val_accuracy.has_value(); }

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

inline Json generator_to_json(const GeneratorSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  j["n"] = s.n;
  j["ws_k"] = s.ws_k;
  j["ws_p"] = s.ws_p;
  j["ba_m"] = s.ba_m;
  j["er_p"] = s.er_p;
  j["seed"] = s.seed;
  return j;
}

inline Json to_json(const ExperimentRecord& r) {
  Json j;
  j["graph_id"] = r.graph_id;
  j["generator"] = generator_to_json(r.generator);
  j["generation_attempts"] = r.generation_attempts;
  Json f;
  for (std::size_t i = 0; i < kNumFeatures; ++i) f[std::string(kFeatureNames[i])] = r.features[i];
  j["features"] = std::move(f);
  j["sink_policy"] = std::string(to_string(r.sink_policy));
  j["activation"] = std::string(to_string(r.activation));
  j["train_config_digest"] = r.train_config_digest;
  j["train_seed"] = r.train_seed;
  j["data_source"] = r.data_source;
  j["val_accuracy"] = r.val_accuracy ? Json(*r.val_accuracy) : Json(nullptr);
  j["test_accuracy"] = r.test_accuracy ? Json(*r.test_accuracy) : Json(nullptr);
  j["status"] = r.status;
  j["wall_time_s"] = r.wall_time_s ? Json(*r.wall_time_s) : Json(nullptr);
  j["tool_version"] = r.tool_version;
  return j;
}

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("record is missing field '") + key + "'");
  return j.at(key);
}

inline std::optional<double> optional_number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace detail

inline ExperimentRecord record_from_json(const Json& j) {
  ExperimentRecord r;
  try {
    r.graph_id = detail::require(j, "graph_id").get<std::size_t>();
    const Json& g = detail::require(j, "generator");
    r.generator.kind = parse_generator_kind(detail::require(g, "kind").get<std::string>());
    r.generator.n = detail::require(g, "n").get<std::size_t>();
    r.generator.ws_k = detail::require(g, "ws_k").get<std::size_t>();
    r.generator.ws_p = detail::require(g, "ws_p").get<double>();
    r.generator.ba_m = detail::require(g, "ba_m").get<std::size_t>();
    r.generator.er_p = detail::require(g, "er_p").get<double>();
    r.generator.seed = detail::require(g, "seed").get<std::uint64_t>();
    r.generation_attempts = detail::require(j, "generation_attempts").get<int>();
    const Json& f = detail::require(j, "features");
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      r.features[i] = detail::require(f, std::string(kFeatureNames[i]).c_str()).get<double>();
    }
    r.sink_policy = parse_sink_policy(detail::require(j, "sink_policy").get<std::string>());
    r.activation = parse_activation(detail::require(j, "activation").get<std::string>());
    r.train_config_digest = detail::require(j, "train_config_digest").get<std::string>();
    r.train_seed = detail::require(j, "train_seed").get<std::uint64_t>();
    r.data_source = detail::require(j, "data_source").get<std::string>();
    r.val_accuracy = detail::optional_number(j, "val_accuracy");
    r.test_accuracy = detail::optional_number(j, "test_accuracy");
    r.status = detail::require(j, "status").get<std::string>();
    r.wall_time_s = detail::optional_number(j, "wall_time_s");
    r.tool_version = detail::require(j, "tool_version").get<std::string>();
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  } catch (const ArgumentError& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
  return r;
}

inline std::string to_json_line(const ExperimentRecord& r) { return to_json(r).dump() + "\n"; }

inline std::vector<Json> read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(0, "cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

inline std::vector<ExperimentRecord> read_records(const std::filesystem::path& path) {
  std::vector<ExperimentRecord> out;
  for (const auto& j : read_json_lines(path)) out.push_back(record_from_json(j));
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// 25 feature columns followed by val_accuracy and test_accuracy; empty cells
// for missing accuracies.
inline void write_records_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) out << kFeatureNames[i] << ',';
  out << "val_accuracy,test_accuracy\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << format_double(r.features[i]) << ',';
    if (r.val_accuracy) out << format_double(*r.val_accuracy);
    out << ',';
    if (r.test_accuracy) out << format_double(*r.test_accuracy);
    out << '\n';
  }
}

}  // namespace sparsenet
