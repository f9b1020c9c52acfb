#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linktheft/attacks.hpp"
#include "linktheft/graph.hpp"
#include "linktheft/models.hpp"
#include "linktheft/pairs.hpp"

namespace linktheft {

/// Rank-based AUC (Mann-Whitney) with average-rank tie handling; equals
/// brute-force pair counting with ties worth 0.5. Throws MetricError when
/// only one class is present.
double auc(const std::vector<double>& scores, const std::vector<bool>& labels);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some denominator was zero and reported as 0
};

/// Positive class = linked.
Prf precision_recall_f1(const std::vector<bool>& predicted,
                        const std::vector<bool>& truth);

/// Conventional link prediction baseline: an MLP over common-neighbor count,
/// Jaccard index and preferential attachment, all computed on the partial
/// (train) graph only.
AttackScores baseline_link_prediction(const PartialGraph& partial,
                                      const std::vector<AttackPair>& train,
                                      const std::vector<AttackPair>& test,
                                      int node_count, uint64_t seed,
                                      const TrainConfig& attack_config);

/// The three baseline features for one pair, on the given partial graph.
std::array<double, 3> link_prediction_features(
    const std::vector<std::vector<int>>& adjacency, int u, int v);

struct BinAuc {
  double lo = 0.0;
  double hi = 0.0;
  int positives = 0;
  int negatives = 0;
  double auc_value = 0.0;
  bool defined = false;  // false when a bin lacks one of the classes
};

/// Groups pairs into [edges[i], edges[i+1]) distance bins and computes the
/// AUC of `scores` inside each bin.
std::vector<BinAuc> distance_bin_analysis(const std::vector<double>& distances,
                                          const std::vector<double>& scores,
                                          const std::vector<bool>& labels,
                                          const std::vector<double>& bin_edges);

/// 0.01-wide bin edges from 0 up to at least `max_distance`.
std::vector<double> default_bin_edges(double max_distance);

struct ExperimentResult {
  int attack_id = -1;
  std::string dataset;
  std::string shadow;  // empty when no shadow dataset is involved
  uint64_t seed = 0;
  double auc_value = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  double runtime_s = 0.0;
  std::string config_hash;
  std::map<std::string, std::string> extra;  // metric, variant, defense_k, ...
};

std::string to_json_line(const ExperimentResult& r);
ExperimentResult result_from_json_line(const std::string& line);
std::vector<ExperimentResult> read_results_jsonl(const std::string& path);
void append_results_jsonl(const std::string& path,
                          const std::vector<ExperimentResult>& results);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when n == 1
};

struct AggregateResult {
  int n_seeds = 0;
  bool single_run = false;
  Stat auc_stat;
  std::optional<Stat> precision_stat;
  std::optional<Stat> recall_stat;
  std::optional<Stat> f1_stat;
};

/// Mean and sample standard deviation over seeds. All results must share one
/// config hash (AggregationError otherwise).
AggregateResult aggregate(const std::vector<ExperimentResult>& results);

/// Runs one ablated evaluation: the attack model is trained on full features,
/// evaluation-time features are zeroed outside `keep`.
ExperimentResult ablate(int attack_id, AttackContext& ctx,
                        const std::vector<AttackPair>& test_pairs,
                        const std::set<FeatureBlock>& keep, uint64_t seed,
                        const AttackOptions& opts);

}  // namespace linktheft
