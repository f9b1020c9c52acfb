#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linktheft/dataset.hpp"
#include "linktheft/matrix.hpp"
#include "linktheft/nn.hpp"

namespace linktheft {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  double dropout_rate = 0.5;
  std::vector<int> hidden_dims{16};
  uint64_t seed = 0;
};

/// Multi-layer GCN. Layer k propagates with the cached normalized adjacency:
/// Z_k = N (H_k W_k); hidden layers apply ReLU (plus dropout during
/// training), the last layer feeds softmax directly.
struct GcnModel {
  std::vector<Matrix> weights;
  Csr norm_adj;
  int attr_dim = 0;
  int num_classes = 0;
  TrainConfig config;
  std::vector<double> loss_history;
};

/// Two-layer GraphSAGE with full-neighborhood mean aggregation:
/// H' = relu([H || mean_nbr(H)] W). Isolated nodes aggregate the zero vector.
struct SageModel {
  std::vector<Matrix> weights;  // layer k: (2 * dims[k]) x dims[k+1]
  Csr mean_agg;
  Csr mean_agg_t;
  int attr_dim = 0;
  int num_classes = 0;
  TrainConfig config;
  std::vector<double> loss_history;
};

/// Plain MLP with bias terms and a softmax head. Used for the reference
/// models and for all attack models.
struct MlpModel {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;  // 1 x dim each
  int input_dim = 0;
  int num_classes = 0;
  TrainConfig config;
  std::vector<double> loss_history;
};

/// Full-batch training; the loss is computed on `labeled_ids` only.
/// Deterministic per config.seed. Throws TrainingError (with the epoch) when
/// the loss turns non-finite.
GcnModel train_gcn(const Dataset& ds, const std::vector<int>& labeled_ids,
                   const TrainConfig& config);

SageModel train_graphsage(const Dataset& ds,
                          const std::vector<int>& labeled_ids,
                          const TrainConfig& config);

/// `labels` is indexed by feature row; rows outside `labeled_row_ids` do not
/// contribute to the loss.
MlpModel train_mlp(const Matrix& features,
                   const std::vector<int>& labeled_row_ids,
                   const std::vector<int>& labels, int num_classes,
                   const TrainConfig& config);

/// Evaluation-mode posterior matrices (dropout disabled, rows sum to 1).
Matrix gcn_posteriors(const GcnModel& m, const Matrix& attrs);
Matrix sage_posteriors(const SageModel& m, const Matrix& attrs);
Matrix mlp_posteriors(const MlpModel& m, const Matrix& features);

/// Posterior vector of one node. Throws OracleError on an unknown id.
std::vector<double> predict(const GcnModel& m, const Matrix& attrs, int node);

/// Loss and gradients at the current weights with dropout disabled; feeds
/// gradient_check. Gradient order: weights (then biases for the MLP).
struct LossGrads {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
LossGrads gcn_loss_grads(const GcnModel& m, const Matrix& attrs,
                         const std::vector<int>& labeled_ids,
                         const std::vector<int>& labels);
LossGrads sage_loss_grads(const SageModel& m, const Matrix& attrs,
                          const std::vector<int>& labeled_ids,
                          const std::vector<int>& labels);
LossGrads mlp_loss_grads(const MlpModel& m, const Matrix& features,
                         const std::vector<int>& labeled_ids,
                         const std::vector<int>& labels);

/// Keeps the k largest entries, zeroes the rest and renormalizes to sum 1.
/// Ties broken toward the lower index. Idempotent for fixed k.
std::vector<double> topk_truncate(const std::vector<double>& posteriors,
                                  int k);

/// Fraction of ids whose posterior argmax equals the label.
double accuracy(const Matrix& posteriors, const std::vector<int>& ids,
                const std::vector<int>& labels);

/// Checkpoints: JSON header (type, dims, seed, config) + base64 little-endian
/// weight payload; round-trips bit-exactly. Graph-derived caches are rebuilt
/// on load via attach_graph.
void save_checkpoint(const std::string& path, const GcnModel& m,
                     const std::string& dataset_name);
void save_checkpoint(const std::string& path, const SageModel& m,
                     const std::string& dataset_name);
void save_checkpoint(const std::string& path, const MlpModel& m,
                     const std::string& dataset_name);

struct LoadedCheckpoint {
  std::string type;  // "gcn" | "sage" | "mlp"
  std::string dataset_name;
  GcnModel gcn;
  SageModel sage;
  MlpModel mlp;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

void attach_graph(GcnModel& m, const Graph& g);
void attach_graph(SageModel& m, const Graph& g);

}  // namespace linktheft
