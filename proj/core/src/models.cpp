#include "linktheft/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "detail/base64.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/graph.hpp"

namespace linktheft {

namespace {

using nlohmann::json;

std::vector<int> layer_dims(int input, const std::vector<int>& hidden,
                            int output) {
  std::vector<int> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  return dims;
}

void check_train_inputs(const std::vector<int>& labeled_ids,
                        const TrainConfig& config) {
  if (labeled_ids.empty()) throw ConfigError("no labeled nodes to train on");
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw ConfigError("dropout rate must be in [0, 1)");
  for (int h : config.hidden_dims)
    if (h <= 0) throw ConfigError("hidden dims must be positive");
}

/// Shared state of one GCN forward pass; keeps what backward needs. The
/// layer-0 input is referenced, not copied, so large attribute matrices are
/// never duplicated.
struct GcnTape {
  const Matrix* input0 = nullptr;
  std::vector<Matrix> hidden;   // post-activation input of layers 1..L-1
  std::vector<Matrix> preacts;  // Z_k = N (H_k W_k)
  std::vector<Matrix> masks;    // dropout multiplier per hidden layer
  Matrix posteriors;

  const Matrix& input_of(size_t k) const {
    return k == 0 ? *input0 : hidden[k - 1];
  }
};

GcnTape gcn_forward(const GcnModel& m, const Matrix& attrs, double dropout_rate,
                    Rng* dropout_rng) {
  GcnTape tape;
  tape.input0 = &attrs;
  const size_t layers = m.weights.size();
  for (size_t k = 0; k < layers; ++k) {
    const Matrix& h = tape.input_of(k);
    Matrix z = spmm(m.norm_adj, matmul(h, m.weights[k]));
    tape.preacts.push_back(z);
    if (k + 1 < layers) {
      Matrix a = relu(z);
      Matrix mask;
      Matrix next;
      if (dropout_rng) {
        next = dropout(a, dropout_rate, *dropout_rng, true, &mask);
      } else {
        next = std::move(a);
        mask = Matrix(next.rows, next.cols, 1.0);
      }
      tape.masks.push_back(std::move(mask));
      tape.hidden.push_back(std::move(next));
    } else {
      tape.posteriors = row_softmax(z);
    }
  }
  return tape;
}

std::vector<Matrix> gcn_backward(const GcnModel& m, const GcnTape& tape,
                                 const std::vector<int>& labeled_ids,
                                 const std::vector<int>& labels) {
  const size_t layers = m.weights.size();
  std::vector<Matrix> grads(layers);
  Matrix dz = cross_entropy_softmax_grad(tape.posteriors, labeled_ids, labels);
  for (size_t k = layers; k-- > 0;) {
    // N is symmetric, so N^T dZ = N dZ.
    Matrix s = spmm(m.norm_adj, dz);
    grads[k] = matmul_at(tape.input_of(k), s);
    if (k > 0) {
      Matrix dh = matmul_bt(s, m.weights[k]);
      const Matrix& z = tape.preacts[k - 1];
      const Matrix& mask = tape.masks[k - 1];
      dz = Matrix(dh.rows, dh.cols);
      for (size_t i = 0; i < dz.data.size(); ++i) {
        dz.data[i] =
            z.data[i] > 0.0 ? dh.data[i] * mask.data[i] : 0.0;
      }
    }
  }
  return grads;
}

struct SageTape {
  std::vector<Matrix> concats;  // [H_k || M H_k]
  std::vector<Matrix> preacts;
  std::vector<Matrix> masks;
  Matrix posteriors;
};

Matrix concat_with_neighbor_mean(const Csr& mean_agg, const Matrix& h) {
  Matrix mh = spmm(mean_agg, h);
  Matrix c(h.rows, 2 * h.cols);
  for (int i = 0; i < h.rows; ++i) {
    std::memcpy(&c.at(i, 0), h.row(i).data(), sizeof(double) * h.cols);
    std::memcpy(&c.at(i, h.cols), mh.row(i).data(), sizeof(double) * h.cols);
  }
  return c;
}

SageTape sage_forward(const SageModel& m, const Matrix& attrs,
                      double dropout_rate, Rng* dropout_rng) {
  SageTape tape;
  const size_t layers = m.weights.size();
  Matrix h;  // hidden activation owned from layer 1 on
  for (size_t k = 0; k < layers; ++k) {
    const Matrix& input = k == 0 ? attrs : h;
    Matrix c = concat_with_neighbor_mean(m.mean_agg, input);
    Matrix z = matmul(c, m.weights[k]);
    tape.concats.push_back(std::move(c));
    tape.preacts.push_back(z);
    if (k + 1 < layers) {
      Matrix a = relu(z);
      Matrix mask;
      if (dropout_rng) {
        h = dropout(a, dropout_rate, *dropout_rng, true, &mask);
      } else {
        h = std::move(a);
        mask = Matrix(h.rows, h.cols, 1.0);
      }
      tape.masks.push_back(std::move(mask));
    } else {
      tape.posteriors = row_softmax(z);
    }
  }
  return tape;
}

std::vector<Matrix> sage_backward(const SageModel& m, const SageTape& tape,
                                  const std::vector<int>& labeled_ids,
                                  const std::vector<int>& labels) {
  const size_t layers = m.weights.size();
  std::vector<Matrix> grads(layers);
  Matrix dz = cross_entropy_softmax_grad(tape.posteriors, labeled_ids, labels);
  for (size_t k = layers; k-- > 0;) {
    grads[k] = matmul_at(tape.concats[k], dz);
    if (k > 0) {
      Matrix dc = matmul_bt(dz, m.weights[k]);
      const int d = dc.cols / 2;
      Matrix left(dc.rows, d), right(dc.rows, d);
      for (int i = 0; i < dc.rows; ++i) {
        std::memcpy(&left.at(i, 0), &dc.at(i, 0), sizeof(double) * d);
        std::memcpy(&right.at(i, 0), &dc.at(i, d), sizeof(double) * d);
      }
      Matrix dh = spmm(m.mean_agg_t, right);
      for (size_t i = 0; i < dh.data.size(); ++i) dh.data[i] += left.data[i];
      const Matrix& z = tape.preacts[k - 1];
      const Matrix& mask = tape.masks[k - 1];
      dz = Matrix(dh.rows, dh.cols);
      for (size_t i = 0; i < dz.data.size(); ++i)
        dz.data[i] = z.data[i] > 0.0 ? dh.data[i] * mask.data[i] : 0.0;
    }
  }
  return grads;
}

struct MlpTape {
  const Matrix* input0 = nullptr;
  std::vector<Matrix> hidden;
  std::vector<Matrix> preacts;
  std::vector<Matrix> masks;
  Matrix posteriors;

  const Matrix& input_of(size_t k) const {
    return k == 0 ? *input0 : hidden[k - 1];
  }
};

MlpTape mlp_forward(const MlpModel& m, const Matrix& features,
                    double dropout_rate, Rng* dropout_rng) {
  MlpTape tape;
  tape.input0 = &features;
  const size_t layers = m.weights.size();
  for (size_t k = 0; k < layers; ++k) {
    const Matrix& h = tape.input_of(k);
    Matrix z = matmul(h, m.weights[k]);
    for (int i = 0; i < z.rows; ++i)
      for (int j = 0; j < z.cols; ++j) z.at(i, j) += m.biases[k].at(0, j);
    tape.preacts.push_back(z);
    if (k + 1 < layers) {
      Matrix a = relu(z);
      Matrix mask;
      Matrix next;
      if (dropout_rng) {
        next = dropout(a, dropout_rate, *dropout_rng, true, &mask);
      } else {
        next = std::move(a);
        mask = Matrix(next.rows, next.cols, 1.0);
      }
      tape.masks.push_back(std::move(mask));
      tape.hidden.push_back(std::move(next));
    } else {
      tape.posteriors = row_softmax(z);
    }
  }
  return tape;
}

// Returns weight gradients followed by bias gradients.
std::vector<Matrix> mlp_backward(const MlpModel& m, const MlpTape& tape,
                                 const std::vector<int>& labeled_ids,
                                 const std::vector<int>& labels) {
  const size_t layers = m.weights.size();
  std::vector<Matrix> wgrads(layers), bgrads(layers);
  Matrix dz = cross_entropy_softmax_grad(tape.posteriors, labeled_ids, labels);
  for (size_t k = layers; k-- > 0;) {
    wgrads[k] = matmul_at(tape.input_of(k), dz);
    bgrads[k] = Matrix(1, dz.cols);
    for (int i = 0; i < dz.rows; ++i)
      for (int j = 0; j < dz.cols; ++j) bgrads[k].at(0, j) += dz.at(i, j);
    if (k > 0) {
      Matrix dh = matmul_bt(dz, m.weights[k]);
      const Matrix& z = tape.preacts[k - 1];
      const Matrix& mask = tape.masks[k - 1];
      dz = Matrix(dh.rows, dh.cols);
      for (size_t i = 0; i < dz.data.size(); ++i)
        dz.data[i] = z.data[i] > 0.0 ? dh.data[i] * mask.data[i] : 0.0;
    }
  }
  std::vector<Matrix> grads;
  grads.reserve(2 * layers);
  for (auto& g : wgrads) grads.push_back(std::move(g));
  for (auto& g : bgrads) grads.push_back(std::move(g));
  return grads;
}

/// One optimizer-driven training loop shared by all three model families.
/// `step` runs forward + backward for one epoch and returns the loss.
template <typename StepFn>
std::vector<double> run_epochs(int epochs, StepFn&& step) {
  std::vector<double> history;
  history.reserve(epochs);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss;
    try {
      loss = step();
    } catch (const NumericError& e) {
      throw TrainingError(epoch, e.what());
    }
    if (!std::isfinite(loss))
      throw TrainingError(epoch, "non-finite training loss");
    history.push_back(loss);
  }
  return history;
}

}  // namespace

GcnModel train_gcn(const Dataset& ds, const std::vector<int>& labeled_ids,
                   const TrainConfig& config) {
  check_train_inputs(labeled_ids, config);
  GcnModel m;
  m.config = config;
  m.attr_dim = ds.attr_dim();
  m.num_classes = ds.num_classes;
  m.norm_adj = normalized_adjacency_csr(ds.graph);

  Rng init_rng(derive_seed(config.seed, "gcn-init"));
  const auto dims = layer_dims(m.attr_dim, config.hidden_dims, m.num_classes);
  for (size_t k = 0; k + 1 < dims.size(); ++k)
    m.weights.push_back(glorot_uniform(dims[k], dims[k + 1], init_rng));

  std::vector<AdamState> opt;
  for (const auto& w : m.weights) opt.push_back(AdamState::like(w));
  Rng dropout_rng(derive_seed(config.seed, "gcn-dropout"));

  m.loss_history = run_epochs(config.epochs, [&] {
    GcnTape tape =
        gcn_forward(m, ds.attributes, config.dropout_rate, &dropout_rng);
    const double loss =
        cross_entropy(tape.posteriors, labeled_ids, ds.labels);
    auto grads = gcn_backward(m, tape, labeled_ids, ds.labels);
    for (size_t k = 0; k < m.weights.size(); ++k)
      adam_step(m.weights[k], grads[k], opt[k], config.learning_rate);
    return loss;
  });
  return m;
}

SageModel train_graphsage(const Dataset& ds,
                          const std::vector<int>& labeled_ids,
                          const TrainConfig& config) {
  check_train_inputs(labeled_ids, config);
  SageModel m;
  m.config = config;
  m.attr_dim = ds.attr_dim();
  m.num_classes = ds.num_classes;
  m.mean_agg = neighbor_mean_csr(ds.graph);
  m.mean_agg_t = transpose(m.mean_agg);

  Rng init_rng(derive_seed(config.seed, "sage-init"));
  const auto dims = layer_dims(m.attr_dim, config.hidden_dims, m.num_classes);
  for (size_t k = 0; k + 1 < dims.size(); ++k)
    m.weights.push_back(glorot_uniform(2 * dims[k], dims[k + 1], init_rng));

  std::vector<AdamState> opt;
  for (const auto& w : m.weights) opt.push_back(AdamState::like(w));
  Rng dropout_rng(derive_seed(config.seed, "sage-dropout"));

  m.loss_history = run_epochs(config.epochs, [&] {
    SageTape tape =
        sage_forward(m, ds.attributes, config.dropout_rate, &dropout_rng);
    const double loss =
        cross_entropy(tape.posteriors, labeled_ids, ds.labels);
    auto grads = sage_backward(m, tape, labeled_ids, ds.labels);
    for (size_t k = 0; k < m.weights.size(); ++k)
      adam_step(m.weights[k], grads[k], opt[k], config.learning_rate);
    return loss;
  });
  return m;
}

MlpModel train_mlp(const Matrix& features,
                   const std::vector<int>& labeled_row_ids,
                   const std::vector<int>& labels, int num_classes,
                   const TrainConfig& config) {
  check_train_inputs(labeled_row_ids, config);
  for (int id : labeled_row_ids)
    if (id < 0 || id >= features.rows)
      throw ConfigError("labeled row " + std::to_string(id) +
                        " outside the feature matrix");
  MlpModel m;
  m.config = config;
  m.input_dim = features.cols;
  m.num_classes = num_classes;

  Rng init_rng(derive_seed(config.seed, "mlp-init"));
  const auto dims = layer_dims(m.input_dim, config.hidden_dims, num_classes);
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    m.weights.push_back(glorot_uniform(dims[k], dims[k + 1], init_rng));
    m.biases.push_back(Matrix(1, dims[k + 1]));
  }

  std::vector<AdamState> wopt, bopt;
  for (const auto& w : m.weights) wopt.push_back(AdamState::like(w));
  for (const auto& b : m.biases) bopt.push_back(AdamState::like(b));
  Rng dropout_rng(derive_seed(config.seed, "mlp-dropout"));

  const size_t layers = m.weights.size();
  m.loss_history = run_epochs(config.epochs, [&] {
    MlpTape tape =
        mlp_forward(m, features, config.dropout_rate, &dropout_rng);
    const double loss = cross_entropy(tape.posteriors, labeled_row_ids, labels);
    auto grads = mlp_backward(m, tape, labeled_row_ids, labels);
    for (size_t k = 0; k < layers; ++k) {
      adam_step(m.weights[k], grads[k], wopt[k], config.learning_rate);
      adam_step(m.biases[k], grads[layers + k], bopt[k],
                config.learning_rate);
    }
    return loss;
  });
  return m;
}

Matrix gcn_posteriors(const GcnModel& m, const Matrix& attrs) {
  return gcn_forward(m, attrs, 0.0, nullptr).posteriors;
}

Matrix sage_posteriors(const SageModel& m, const Matrix& attrs) {
  return sage_forward(m, attrs, 0.0, nullptr).posteriors;
}

Matrix mlp_posteriors(const MlpModel& m, const Matrix& features) {
  return mlp_forward(m, features, 0.0, nullptr).posteriors;
}

std::vector<double> predict(const GcnModel& m, const Matrix& attrs, int node) {
  if (node < 0 || node >= attrs.rows)
    throw OracleError("unknown node " + std::to_string(node));
  Matrix p = gcn_posteriors(m, attrs);
  auto row = p.row(node);
  return {row.begin(), row.end()};
}

LossGrads gcn_loss_grads(const GcnModel& m, const Matrix& attrs,
                         const std::vector<int>& labeled_ids,
                         const std::vector<int>& labels) {
  GcnTape tape = gcn_forward(m, attrs, 0.0, nullptr);
  return {cross_entropy(tape.posteriors, labeled_ids, labels),
          gcn_backward(m, tape, labeled_ids, labels)};
}

LossGrads sage_loss_grads(const SageModel& m, const Matrix& attrs,
                          const std::vector<int>& labeled_ids,
                          const std::vector<int>& labels) {
  SageTape tape = sage_forward(m, attrs, 0.0, nullptr);
  return {cross_entropy(tape.posteriors, labeled_ids, labels),
          sage_backward(m, tape, labeled_ids, labels)};
}

LossGrads mlp_loss_grads(const MlpModel& m, const Matrix& features,
                         const std::vector<int>& labeled_ids,
                         const std::vector<int>& labels) {
  MlpTape tape = mlp_forward(m, features, 0.0, nullptr);
  return {cross_entropy(tape.posteriors, labeled_ids, labels),
          mlp_backward(m, tape, labeled_ids, labels)};
}

std::vector<double> topk_truncate(const std::vector<double>& posteriors,
                                  int k) {
  const int n = static_cast<int>(posteriors.size());
  if (k < 1 || k > n)
    throw ConfigError("top-k with k=" + std::to_string(k) + " on " +
                      std::to_string(n) + " classes");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (posteriors[a] != posteriors[b]) return posteriors[a] > posteriors[b];
    return a < b;
  });
  std::vector<double> out(n, 0.0);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += posteriors[idx[i]];
  for (int i = 0; i < k; ++i) {
    out[idx[i]] =
        sum > 0.0 ? posteriors[idx[i]] / sum : 1.0 / static_cast<double>(k);
  }
  return out;
}

double accuracy(const Matrix& posteriors, const std::vector<int>& ids,
                const std::vector<int>& labels) {
  if (ids.empty()) return 0.0;
  int hits = 0;
  for (int id : ids) {
    auto row = posteriors.row(id);
    int best = 0;
    for (int j = 1; j < static_cast<int>(row.size()); ++j)
      if (row[j] > row[best]) best = j;
    hits += best == labels[id];
  }
  return static_cast<double>(hits) / static_cast<double>(ids.size());
}

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows},
              {"cols", m.cols},
              {"data_b64", detail::doubles_to_b64(m.data)}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = j.at("rows").get<int>();
  m.cols = j.at("cols").get<int>();
  m.data = detail::b64_to_doubles(j.at("data_b64").get<std::string>());
  if (m.data.size() != static_cast<size_t>(m.rows) * m.cols)
    throw ParseError("<checkpoint>", 0, "weight payload size mismatch");
  return m;
}

json config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"dropout_rate", c.dropout_rate},
              {"hidden_dims", c.hidden_dims},
              {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void write_checkpoint_json(const std::string& path, json j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json checkpoint_header(const std::string& type, const std::string& dataset,
                       int attr_dim, int num_classes, const TrainConfig& cfg) {
  return json{{"type", type},
              {"dataset", dataset},
              {"attr_dim", attr_dim},
              {"num_classes", num_classes},
              {"seed", cfg.seed},
              {"config", config_to_json(cfg)}};
}

}  // namespace

void save_checkpoint(const std::string& path, const GcnModel& m,
                     const std::string& dataset_name) {
  json j = checkpoint_header("gcn", dataset_name, m.attr_dim, m.num_classes,
                             m.config);
  j["weights"] = json::array();
  for (const auto& w : m.weights) j["weights"].push_back(matrix_to_json(w));
  write_checkpoint_json(path, std::move(j));
}

void save_checkpoint(const std::string& path, const SageModel& m,
                     const std::string& dataset_name) {
  json j = checkpoint_header("sage", dataset_name, m.attr_dim, m.num_classes,
                             m.config);
  j["weights"] = json::array();
  for (const auto& w : m.weights) j["weights"].push_back(matrix_to_json(w));
  write_checkpoint_json(path, std::move(j));
}

void save_checkpoint(const std::string& path, const MlpModel& m,
                     const std::string& dataset_name) {
  json j = checkpoint_header("mlp", dataset_name, m.input_dim, m.num_classes,
                             m.config);
  j["weights"] = json::array();
  for (const auto& w : m.weights) j["weights"].push_back(matrix_to_json(w));
  j["biases"] = json::array();
  for (const auto& b : m.biases) j["biases"].push_back(matrix_to_json(b));
  write_checkpoint_json(path, std::move(j));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  LoadedCheckpoint ck;
  ck.type = j.at("type").get<std::string>();
  ck.dataset_name = j.value("dataset", "");
  const TrainConfig cfg = config_from_json(j.at("config"));
  const int attr_dim = j.at("attr_dim").get<int>();
  const int num_classes = j.at("num_classes").get<int>();
  if (ck.type == "gcn") {
    ck.gcn.config = cfg;
    ck.gcn.attr_dim = attr_dim;
    ck.gcn.num_classes = num_classes;
    for (const auto& w : j.at("weights"))
      ck.gcn.weights.push_back(matrix_from_json(w));
  } else if (ck.type == "sage") {
    ck.sage.config = cfg;
    ck.sage.attr_dim = attr_dim;
    ck.sage.num_classes = num_classes;
    for (const auto& w : j.at("weights"))
      ck.sage.weights.push_back(matrix_from_json(w));
  } else if (ck.type == "mlp") {
    ck.mlp.config = cfg;
    ck.mlp.input_dim = attr_dim;
    ck.mlp.num_classes = num_classes;
    for (const auto& w : j.at("weights"))
      ck.mlp.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases"))
      ck.mlp.biases.push_back(matrix_from_json(b));
  } else {
    throw ParseError(path, 0, "unknown checkpoint type '" + ck.type + "'");
  }
  return ck;
}

void attach_graph(GcnModel& m, const Graph& g) {
  m.norm_adj = normalized_adjacency_csr(g);
}

void attach_graph(SageModel& m, const Graph& g) {
  m.mean_agg = neighbor_mean_csr(g);
  m.mean_agg_t = transpose(m.mean_agg);
}

}  // namespace linktheft
