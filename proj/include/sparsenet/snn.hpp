#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sparsenet/dag.hpp"
#include "sparsenet/data.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/rng.hpp"

namespace sparsenet {

enum class SinkPolicy { all_sinks, last_layer_only };
enum class Activation { relu, tanh };

inline std::string_view to_string(SinkPolicy p) {
  return p == SinkPolicy::all_sinks ? "all_sinks" : "last_layer_only";
}

inline SinkPolicy parse_sink_policy(std::string_view s) {
  if (s == "all_sinks") return SinkPolicy::all_sinks;
  if (s == "last_layer_only") return SinkPolicy::last_layer_only;
  throw ArgumentError("unknown sink policy '" + std::string(s) + "' (expected all_sinks or last_layer_only)");
}

inline std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ArgumentError("unknown activation '" + std::string(s) + "' (expected relu or tanh)");
}

// One trainable connection of the mask, in parameter order. Node ids:
// input i, hidden vertex v, output o; biases have from_kind == Bias.
struct Connection {
  enum class Kind { input, hidden, output, bias };
  Kind from_kind;
  std::size_t from;
  Kind to_kind;
  std::size_t to;
};

// Feed-forward network whose hidden units are the vertices of a layered DAG.
// The input block is dense onto layer 0 (the sources), each DAG arc is one
// weight, and the output block is dense from the output-attachment set.
//
// Parameters live in one flat vector laid out as
//   [input weights: |L0| x input_dim][arc weights][output weights: output_dim x |S_out|]
//   [hidden biases][output biases]
// so gradients, optimizer state and snapshots share the same indexing.
template <typename Scalar>
class SparseNet {
  static_assert(std::is_floating_point_v<Scalar>);

 public:
  // Activations of one forward pass over a batch; consumed by backward().
  struct ForwardState {
    std::size_t batch = 0;
    std::vector<Scalar> pre;     // batch x hidden
    std::vector<Scalar> act;     // batch x hidden
    std::vector<Scalar> logits;  // batch x output_dim
  };

  SparseNet() = default;

  SparseNet(const LayeredDag& dag, std::size_t input_dim, std::size_t output_dim,
            SinkPolicy policy = SinkPolicy::all_sinks, Activation activation = Activation::relu)
      : dag_(dag.is_layered() ? dag : layer_index(dag)),
        input_dim_(input_dim),
        output_dim_(output_dim),
        policy_(policy),
        activation_(activation) {
    if (input_dim_ == 0 || output_dim_ == 0) throw EmbeddingError("input and output widths must be positive");
    const std::size_t n = dag_.num_vertices();
    const auto& layers = dag_.layers();
    if (layers.empty() || layers.front().empty()) throw EmbeddingError("DAG has no layer-0 vertices");

    // Hidden neuron index = position in (layer, id) order.
    position_of_.assign(n, 0);
    order_.reserve(n);
    for (const auto& layer : layers) {
      for (Vertex v : layer) {
        position_of_[v] = order_.size();
        order_.push_back(v);
      }
    }
    num_inputs_attached_ = layers.front().size();

    arc_off_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) arc_off_[i + 1] = arc_off_[i] + dag_.in_degree(order_[i]);
    arc_src_.resize(arc_off_[n]);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = arc_off_[i];
      for (Vertex p : dag_.predecessors(order_[i])) arc_src_[k++] = position_of_[p];
    }

    const std::vector<Vertex>& attach = policy_ == SinkPolicy::all_sinks ? dag_.sinks() : layers.back();
    if (attach.empty()) throw EmbeddingError("output attachment set is empty");
    for (Vertex v : attach) out_src_.push_back(position_of_[v]);
    std::sort(out_src_.begin(), out_src_.end());

    in_w_off_ = 0;
    arc_w_off_ = in_w_off_ + num_inputs_attached_ * input_dim_;
    out_w_off_ = arc_w_off_ + arc_src_.size();
    hid_b_off_ = out_w_off_ + output_dim_ * out_src_.size();
    out_b_off_ = hid_b_off_ + n;
    params_.assign(out_b_off_ + output_dim_, Scalar(0));
  }

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t num_hidden() const noexcept { return order_.size(); }
  std::size_t num_arcs() const noexcept { return arc_src_.size(); }
  std::size_t num_input_attached() const noexcept { return num_inputs_attached_; }
  std::size_t num_output_attached() const noexcept { return out_src_.size(); }
  std::size_t num_parameters() const noexcept { return params_.size(); }
  SinkPolicy sink_policy() const noexcept { return policy_; }
  Activation activation() const noexcept { return activation_; }
  const LayeredDag& dag() const noexcept { return dag_; }

  // Hidden vertices in evaluation order.
  const std::vector<Vertex>& evaluation_order() const noexcept { return order_; }

  std::span<Scalar> parameters() noexcept { return params_; }
  std::span<const Scalar> parameters() const noexcept { return params_; }

  // Every parameter as a connection of the mask, in parameter order.
  std::vector<Connection> connections() const {
    using K = Connection::Kind;
    std::vector<Connection> out;
    out.reserve(params_.size());
    for (std::size_t s = 0; s < num_inputs_attached_; ++s) {
      for (std::size_t i = 0; i < input_dim_; ++i) out.push_back({K::input, i, K::hidden, order_[s]});
    }
    for (std::size_t t = 0; t < order_.size(); ++t) {
      for (std::size_t k = arc_off_[t]; k < arc_off_[t + 1]; ++k) {
        out.push_back({K::hidden, order_[arc_src_[k]], K::hidden, order_[t]});
      }
    }
    for (std::size_t o = 0; o < output_dim_; ++o) {
      for (std::size_t j : out_src_) out.push_back({K::hidden, order_[j], K::output, o});
    }
    for (Vertex v : order_) out.push_back({K::bias, 0, K::hidden, v});
    for (std::size_t o = 0; o < output_dim_; ++o) out.push_back({K::bias, 0, K::output, o});
    return out;
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per connection and bias, where
  // fan_in counts only the connections present in the mask.
  void initialize(std::uint64_t seed) {
    Rng rng = Rng(seed).split(0x1417);
    auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (std::size_t i = 0; i < count; ++i) params_[begin + i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    };
    for (std::size_t t = 0; t < order_.size(); ++t) {
      const std::size_t fan_in = hidden_fan_in(t);
      if (t < num_inputs_attached_) fill(in_w_off_ + t * input_dim_, input_dim_, fan_in);
      fill(arc_w_off_ + arc_off_[t], arc_off_[t + 1] - arc_off_[t], fan_in);
      fill(hid_b_off_ + t, 1, fan_in);
    }
    for (std::size_t o = 0; o < output_dim_; ++o) {
      fill(out_w_off_ + o * out_src_.size(), out_src_.size(), out_src_.size());
      fill(out_b_off_ + o, 1, out_src_.size());
    }
  }

  ForwardState forward_state(std::span<const Scalar> inputs) const { return forward_state(inputs, default_order()); }

  // Evaluates hidden neurons in `neuron_order`, which must be a topological
  // order of hidden neuron indices (used to check order independence).
  ForwardState forward_state(std::span<const Scalar> inputs, std::span<const std::size_t> neuron_order) const {
    if (inputs.size() % input_dim_ != 0) {
      throw ArgumentError("forward: input length " + std::to_string(inputs.size()) +
                          " is not a multiple of input width " + std::to_string(input_dim_));
    }
    const std::size_t batch = inputs.size() / input_dim_;
    const std::size_t h = order_.size();
    ForwardState st;
    st.batch = batch;
    st.pre.assign(batch * h, Scalar(0));
    st.act.assign(batch * h, Scalar(0));
    st.logits.assign(batch * output_dim_, Scalar(0));
    const Scalar* w = params_.data();
    for (std::size_t b = 0; b < batch; ++b) {
      const Scalar* x = inputs.data() + b * input_dim_;
      Scalar* pre = st.pre.data() + b * h;
      Scalar* act = st.act.data() + b * h;
      for (std::size_t t : neuron_order) {
        Scalar z = w[hid_b_off_ + t];
        if (t < num_inputs_attached_) {
          const Scalar* row = w + in_w_off_ + t * input_dim_;
          Scalar dot = 0;
          for (std::size_t i = 0; i < input_dim_; ++i) dot += row[i] * x[i];
          z += dot;
        }
        for (std::size_t k = arc_off_[t]; k < arc_off_[t + 1]; ++k) z += w[arc_w_off_ + k] * act[arc_src_[k]];
        pre[t] = z;
        act[t] = activate(z);
      }
      Scalar* logit = st.logits.data() + b * output_dim_;
      for (std::size_t o = 0; o < output_dim_; ++o) {
        Scalar z = w[out_b_off_ + o];
        const Scalar* row = w + out_w_off_ + o * out_src_.size();
        for (std::size_t j = 0; j < out_src_.size(); ++j) z += row[j] * act[out_src_[j]];
        logit[o] = z;
      }
    }
    return st;
  }

  std::vector<Scalar> forward(std::span<const Scalar> inputs) const { return forward_state(inputs).logits; }

  // Mean softmax cross-entropy over the batch.
  Scalar loss(const ForwardState& st, std::span<const std::uint8_t> labels) const {
    double total = 0.0;
    for (std::size_t b = 0; b < st.batch; ++b) {
      const Scalar* z = st.logits.data() + b * output_dim_;
      const Scalar zmax = *std::max_element(z, z + output_dim_);
      double sum = 0.0;
      for (std::size_t o = 0; o < output_dim_; ++o) sum += std::exp(static_cast<double>(z[o] - zmax));
      total += std::log(sum) - static_cast<double>(z[labels[b]] - zmax);
    }
    return static_cast<Scalar>(total / static_cast<double>(st.batch));
  }

  // Gradient of loss() with respect to every parameter (same layout as
  // parameters()). Accumulates into `grad`, which must be sized num_parameters().
  void backward(const ForwardState& st, std::span<const Scalar> inputs, std::span<const std::uint8_t> labels,
                std::span<Scalar> grad) const {
    if (grad.size() != params_.size()) throw ArgumentError("backward: gradient buffer has wrong size");
    if (labels.size() != st.batch) throw ArgumentError("backward: label count differs from batch size");
    const std::size_t h = order_.size();
    const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(st.batch);
    const Scalar* w = params_.data();
    std::vector<Scalar> dlogit(output_dim_);
    std::vector<Scalar> dact(h);
    for (std::size_t b = 0; b < st.batch; ++b) {
      const Scalar* x = inputs.data() + b * input_dim_;
      const Scalar* pre = st.pre.data() + b * h;
      const Scalar* act = st.act.data() + b * h;
      const Scalar* z = st.logits.data() + b * output_dim_;

      const Scalar zmax = *std::max_element(z, z + output_dim_);
      Scalar sum = 0;
      for (std::size_t o = 0; o < output_dim_; ++o) {
        dlogit[o] = std::exp(z[o] - zmax);
        sum += dlogit[o];
      }
      for (std::size_t o = 0; o < output_dim_; ++o) dlogit[o] = dlogit[o] / sum * inv_batch;
      dlogit[labels[b]] -= inv_batch;

      std::fill(dact.begin(), dact.end(), Scalar(0));
      for (std::size_t o = 0; o < output_dim_; ++o) {
        const Scalar g = dlogit[o];
        grad[out_b_off_ + o] += g;
        const std::size_t row = out_w_off_ + o * out_src_.size();
        for (std::size_t j = 0; j < out_src_.size(); ++j) {
          grad[row + j] += g * act[out_src_[j]];
          dact[out_src_[j]] += g * w[row + j];
        }
      }
      for (std::size_t t = h; t-- > 0;) {
        const Scalar dz = dact[t] * activate_derivative(pre[t], act[t]);
        if (dz == Scalar(0)) continue;
        grad[hid_b_off_ + t] += dz;
        for (std::size_t k = arc_off_[t]; k < arc_off_[t + 1]; ++k) {
          grad[arc_w_off_ + k] += dz * act[arc_src_[k]];
          dact[arc_src_[k]] += dz * w[arc_w_off_ + k];
        }
        if (t < num_inputs_attached_) {
          Scalar* row = grad.data() + in_w_off_ + t * input_dim_;
          for (std::size_t i = 0; i < input_dim_; ++i) row[i] += dz * x[i];
        }
      }
    }
  }

  // Index of the largest logit per row; ties resolve to the lowest class.
  std::vector<std::uint8_t> predict(std::span<const Scalar> inputs) const {
    const auto logits = forward(inputs);
    std::vector<std::uint8_t> out(logits.size() / output_dim_);
    for (std::size_t b = 0; b < out.size(); ++b) {
      const Scalar* z = logits.data() + b * output_dim_;
      out[b] = static_cast<std::uint8_t>(std::max_element(z, z + output_dim_) - z);
    }
    return out;
  }

 private:
  std::vector<std::size_t> default_order() const {
    std::vector<std::size_t> order(order_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return order;
  }

  std::size_t hidden_fan_in(std::size_t t) const {
    return (t < num_inputs_attached_ ? input_dim_ : 0) + (arc_off_[t + 1] - arc_off_[t]);
  }

  Scalar activate(Scalar z) const {
    return activation_ == Activation::relu ? (z > Scalar(0) ? z : Scalar(0)) : std::tanh(z);
  }

  Scalar activate_derivative(Scalar z, Scalar a) const {
    return activation_ == Activation::relu ? (z > Scalar(0) ? Scalar(1) : Scalar(0)) : Scalar(1) - a * a;
  }

  LayeredDag dag_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  SinkPolicy policy_ = SinkPolicy::all_sinks;
  Activation activation_ = Activation::relu;

  std::vector<Vertex> order_;
  std::vector<std::size_t> position_of_;
  std::size_t num_inputs_attached_ = 0;
  std::vector<std::size_t> arc_off_;
  std::vector<std::size_t> arc_src_;
  std::vector<std::size_t> out_src_;

  std::size_t in_w_off_ = 0, arc_w_off_ = 0, out_w_off_ = 0, hid_b_off_ = 0, out_b_off_ = 0;
  std::vector<Scalar> params_;
};

template <typename Scalar = float>
SparseNet<Scalar> embed(const LayeredDag& dag, std::size_t input_dim, std::size_t output_dim,
                        SinkPolicy policy = SinkPolicy::all_sinks, Activation activation = Activation::relu) {
  return SparseNet<Scalar>(dag, input_dim, output_dim, policy, activation);
}

// Closed-form trainable parameter count.
inline std::size_t expected_parameter_count(std::size_t input_dim, std::size_t output_dim, std::size_t layer0,
                                            std::size_t arcs, std::size_t attached, std::size_t hidden) {
  return input_dim * layer0 + arcs + attached * output_dim + hidden + output_dim;
}

struct TrainConfig {
  int epochs = 5;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::string optimizer = "sgd_momentum";
  std::string init = "fanin_uniform";
  std::uint64_t seed = 1;
  std::size_t train_n = 55000;
  std::size_t val_n = 5000;
  std::size_t test_n = 10000;

  void validate() const {
    if (epochs < 1) throw ArgumentError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("train config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("train config: learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("train config: momentum must lie in [0,1)");
    if (optimizer != "sgd_momentum") throw ArgumentError("train config: unsupported optimizer '" + optimizer + "'");
    if (init != "fanin_uniform") throw ArgumentError("train config: unsupported init '" + init + "'");
    if (train_n == 0) throw ArgumentError("train config: train_n must be positive");
  }

  // Canonical text used for digests; the seed is excluded because it varies per record.
  std::string canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "epochs=" << epochs << ";batch_size=" << batch_size << ";learning_rate=" << learning_rate
        << ";momentum=" << momentum << ";optimizer=" << optimizer << ";init=" << init << ";train_n=" << train_n
        << ";val_n=" << val_n << ";test_n=" << test_n;
    return out.str();
  }

  std::string digest() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
  }
};

struct TrainResult {
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

namespace detail {

template <typename Scalar>
void gather_batch(const LabeledDataset& data, std::span<const std::size_t> rows, std::vector<Scalar>& x,
                  std::vector<std::uint8_t>& y) {
  x.resize(rows.size() * data.cols);
  y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto img = data.image(rows[r]);
    std::copy(img.begin(), img.end(), x.begin() + static_cast<std::ptrdiff_t>(r * data.cols));
    y[r] = data.labels[rows[r]];
  }
}

}  // namespace detail

template <typename Scalar>
double accuracy(const SparseNet<Scalar>& net, const LabeledDataset& data, std::span<const std::size_t> rows,
                std::size_t chunk = 512) {
  if (rows.empty()) return 0.0;
  std::vector<Scalar> x;
  std::vector<std::uint8_t> y;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < rows.size(); begin += chunk) {
    const auto part = rows.subspan(begin, std::min(chunk, rows.size() - begin));
    detail::gather_batch(data, part, x, y);
    const auto pred = net.predict(x);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i];
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

// Mini-batch SGD with momentum (v = mu v + g; w -= lr v) on the train split,
// then accuracy on the val and test splits. Initializes the net from cfg.seed.
template <typename Scalar>
TrainResult train_and_eval(SparseNet<Scalar>& net, const LabeledDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (!data.has_splits()) throw ArgumentError("train_and_eval: dataset has no train split");
  if (data.cols != net.input_dim()) throw ArgumentError("train_and_eval: image width differs from net input width");
  net.initialize(cfg.seed);
  Rng shuffle_root = Rng(cfg.seed).split(0x5f1e);

  auto params = net.parameters();
  std::vector<Scalar> grad(params.size());
  std::vector<Scalar> velocity(params.size(), Scalar(0));
  std::vector<std::size_t> order(data.train);
  std::vector<Scalar> x;
  std::vector<std::uint8_t> y;
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  const auto mu = static_cast<Scalar>(cfg.momentum);

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_root.split(static_cast<std::uint64_t>(epoch)).shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const auto rows = std::span<const std::size_t>(order).subspan(begin, std::min(cfg.batch_size, order.size() - begin));
      detail::gather_batch(data, rows, x, y);
      const auto st = net.forward_state(x);
      const double loss = static_cast<double>(net.loss(st, y));
      if (!std::isfinite(loss)) throw TrainingDivergedError(epoch + 1, "non-finite loss at batch " + std::to_string(batches));
      loss_sum += loss;
      ++batches;
      std::fill(grad.begin(), grad.end(), Scalar(0));
      net.backward(st, x, y, grad);
      bool finite = true;
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = mu * velocity[i] + grad[i];
        params[i] -= lr * velocity[i];
        finite = finite && std::isfinite(params[i]);
      }
      if (!finite) throw TrainingDivergedError(epoch + 1, "non-finite parameter after batch " + std::to_string(batches - 1));
    }
    result.loss_curve.push_back(loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1)));
  }
  result.val_accuracy = accuracy(net, data, data.val);
  result.test_accuracy = accuracy(net, data, data.test);
  return result;
}

// Text snapshot: header, DAG arcs, then every parameter as a hex float so the
// round trip is exact.
template <typename Scalar>
void write_snapshot(const SparseNet<Scalar>& net, std::ostream& out) {
  out << "sparsenet-snapshot 1\n";
  out << "scalar " << (std::is_same_v<Scalar, float> ? "float" : "double") << '\n';
  out << "input_dim " << net.input_dim() << '\n';
  out << "output_dim " << net.output_dim() << '\n';
  out << "activation " << to_string(net.activation()) << '\n';
  out << "sink_policy " << to_string(net.sink_policy()) << '\n';
  out << "dag\n";
  write_layered_dag(net.dag(), out);
  out << "params " << net.num_parameters() << '\n';
  char buf[64];
  for (Scalar p : net.parameters()) {
    std::snprintf(buf, sizeof buf, "%a\n", static_cast<double>(p));
    out << buf;
  }
}

template <typename Scalar>
SparseNet<Scalar> read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "unexpected end of snapshot");
    ++line_no;
    return line;
  };
  auto field = [&](std::string_view key) {
    const std::string& l = next();
    if (l.rfind(std::string(key) + " ", 0) != 0) throw ParseError(line_no, "expected '" + std::string(key) + "'");
    return l.substr(key.size() + 1);
  };
  if (next() != "sparsenet-snapshot 1") throw ParseError(line_no, "not a version-1 snapshot");
  const std::string scalar = field("scalar");
  if (scalar != (std::is_same_v<Scalar, float> ? "float" : "double")) {
    throw ParseError(line_no, "snapshot scalar type '" + scalar + "' does not match");
  }
  const std::size_t input_dim = std::stoul(field("input_dim"));
  const std::size_t output_dim = std::stoul(field("output_dim"));
  const Activation act = parse_activation(field("activation"));
  const SinkPolicy policy = parse_sink_policy(field("sink_policy"));
  if (next() != "dag") throw ParseError(line_no, "expected 'dag'");

  // The DAG block is: header, arcs, one layer line per vertex.
  std::string dag_text = next() + "\n";
  std::uint64_t n = 0, a = 0;
  if (!detail::parse_pair(line, n, a)) throw ParseError(line_no, "malformed dag header");
  for (std::uint64_t i = 0; i < a + n; ++i) dag_text += next() + "\n";
  LayeredDag dag = read_layered_dag(dag_text);

  SparseNet<Scalar> net(dag, input_dim, output_dim, policy, act);
  const std::size_t count = std::stoul(field("params"));
  if (count != net.num_parameters()) throw ParseError(line_no, "parameter count does not match structure");
  auto params = net.parameters();
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& l = next();
    char* end = nullptr;
    const double v = std::strtod(l.c_str(), &end);
    if (end == l.c_str() || *end != '\0') throw ParseError(line_no, "malformed parameter value");
    params[i] = static_cast<Scalar>(v);
  }
  return net;
}

}  // namespace sparsenet
