#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linktheft/attacks.hpp"
#include "linktheft/dataset.hpp"
#include "linktheft/eval.hpp"
#include "linktheft/oracle.hpp"

namespace linktheft {

/// Everything that pins down one experiment besides the seed. Hashing this
/// (plus attack id and dataset names) yields the config hash carried by every
/// result row; rows may only be aggregated when the hashes match.
struct ExperimentConfig {
  double labeled_fraction = 0.1;
  double train_fraction = 0.5;
  int defense_k = 0;  // 0 = defense off
  DistanceMetric metric = DistanceMetric::kCorrelation;
  Attack2Variant variant = Attack2Variant::kAuto;
  std::string target_model = "gcn";  // "gcn" | "sage"
  std::vector<int> shadow_hidden_dims{16};
  TrainConfig target_config = default_target_config();
  TrainConfig reference_config = default_reference_config();
  TrainConfig attack_config = default_attack_config();
};

std::string config_hash(const ExperimentConfig& cfg, int attack_id,
                        const std::string& dataset,
                        const std::string& shadow);

/// Output of one (attack, seed) cell.
struct AttackRun {
  ExperimentResult result;
  /// For the unsupervised attacks: the per-test-pair distances
  /// (report feeds them into histograms and distance-bin AUC tables).
  std::vector<double> distances;
  std::vector<bool> test_truth;
};

/// Runs attack cells against one target dataset. Per seed, the runner samples
/// the labeled nodes, trains (or proxies) the target model, builds and splits
/// the balanced attack pair set, and executes attacks; artifacts are cached
/// so several attacks on the same seed share the target, reference and shadow
/// models. Not thread-safe: use one runner per worker.
class ExperimentRunner {
 public:
  ExperimentRunner(const Dataset& target, ExperimentConfig config);
  ~ExperimentRunner();

  /// Attacks 1/4/5/7 need a shadow dataset.
  void set_shadow(const Dataset* shadow);

  /// Replaces per-seed target training with a fixed posterior matrix
  /// (e.g. loaded from a checkpoint); defense_k still applies locally.
  void set_fixed_posteriors(Matrix posteriors);

  /// Replaces the target with a remote oracle. Any defense runs server-side.
  void set_remote_oracle(const std::string& host, int port);

  /// Evaluation-time knobs: these do not invalidate cached per-seed state
  /// (trained target/reference models, pair splits), so sweeping metrics or
  /// attack-2 variants reuses the models of the current seed.
  void set_metric(DistanceMetric metric) { config_.metric = metric; }
  void set_variant(Attack2Variant variant) { config_.variant = variant; }

  AttackRun run_attack_cell(int attack_id, uint64_t seed);
  AttackRun run_baseline_cell(uint64_t seed);
  AttackRun run_ablation_cell(int attack_id, const std::set<FeatureBlock>& keep,
                              uint64_t seed);

  const Dataset& target() const { return target_; }
  const ExperimentConfig& config() const { return config_; }

 private:
  struct SeedState;
  SeedState& state_for(uint64_t seed);
  AttackOptions attack_options() const;
  ExperimentResult make_result(int attack_id, uint64_t seed,
                               const AttackScores& scores,
                               const std::vector<AttackPair>& test,
                               double runtime_s) const;

  const Dataset& target_;
  ExperimentConfig config_;
  const Dataset* shadow_ = nullptr;
  std::optional<Matrix> fixed_posteriors_;
  std::string remote_host_;
  int remote_port_ = 0;
  std::unique_ptr<SeedState> state_;
};

}  // namespace linktheft
