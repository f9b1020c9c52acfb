#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "linktheft/dataset.hpp"
#include "linktheft/features.hpp"
#include "linktheft/models.hpp"
#include "linktheft/oracle.hpp"
#include "linktheft/pairs.hpp"

namespace linktheft {

/// Which of the three background-knowledge dimensions the adversary holds:
/// target attributes F, target partial graph A*, shadow dataset D'.
struct KnowledgeTriplet {
  bool has_attributes = false;
  bool has_partial_graph = false;
  bool has_shadow = false;

  bool operator==(const KnowledgeTriplet&) const = default;
};

/// Bijection between knowledge triplets and attack ids 0..7.
int resolve_attack(const KnowledgeTriplet& k);
KnowledgeTriplet knowledge_for_attack(int attack_id);

/// Per-test-pair scores; higher = more likely linked. Hard labels are present
/// when the attack can binarize (supervised argmax or K-means thresholding).
struct AttackScores {
  std::vector<double> scores;
  std::optional<std::vector<bool>> hard_labels;
};

enum class Attack2Variant {
  kAuto,  // attribute distance for low-dim attributes, else target posteriors
  kTargetPosteriors,
  kAttributes,
  kDifference,
  kReferencePosteriors,
};

std::string variant_name(Attack2Variant v);
std::optional<Attack2Variant> variant_from_name(const std::string& name);

TrainConfig default_target_config();     // GCN/SAGE: 16 hidden, 100 ep, lr .01
TrainConfig default_reference_config();  // MLP 2x16, 100 ep, lr .01
TrainConfig default_attack_config();     // MLP 3x32, 50 ep, lr .001

struct AttackOptions {
  DistanceMetric metric = DistanceMetric::kCorrelation;
  Attack2Variant variant = Attack2Variant::kAuto;
  /// Fraction of shadow nodes whose labels train the shadow models.
  double labeled_fraction = 0.1;
  /// Hidden widths of the shadow target GCN; {16, 16, 16} reproduces the
  /// heterogeneous-architecture experiment.
  std::vector<int> shadow_hidden_dims{16};
  TrainConfig target_config = default_target_config();
  TrainConfig reference_config = default_reference_config();
  TrainConfig attack_config = default_attack_config();
};

/// The adversary's working set. Present artifacts must match the knowledge
/// triplet of the attack being run; engines lazily train the models their
/// attack needs (reference g, shadow target f', shadow reference g') and
/// cache them here, keyed by the run seed.
struct AttackContext {
  PosteriorOracle* oracle = nullptr;  // always required

  // F: target attributes plus a small labeled subset.
  const Matrix* target_attrs = nullptr;
  std::vector<int> labeled_ids;
  const std::vector<int>* target_labels = nullptr;
  int target_num_classes = 0;

  // A*: pair set whose train half induces the known partial graph.
  const AttackPairSet* pairs = nullptr;

  // D'.
  const Dataset* shadow = nullptr;

  // Lazily built artifacts.
  std::optional<Matrix> f_cache;  // oracle posteriors, rows filled on demand
  std::vector<char> f_fetched;
  std::optional<Matrix> g_posteriors;
  std::optional<Matrix> shadow_f_posteriors;
  std::optional<Matrix> shadow_g_posteriors;
  std::optional<AttackPairSet> shadow_pairs;

  /// Queries the oracle for every endpoint not fetched yet.
  const Matrix& fetch_target_posteriors(const std::vector<AttackPair>& pairs);
};

/// Attack-0: unsupervised, score = -d(f(u), f(v)).
AttackScores attack0_scores(PosteriorOracle& oracle,
                            const std::vector<AttackPair>& pairs,
                            DistanceMetric metric);

/// Attack-2: unsupervised over one of four information types. Trains the
/// reference model internally for the variants that need it.
AttackScores attack2_scores(AttackContext& ctx,
                            const std::vector<AttackPair>& pairs,
                            Attack2Variant variant, DistanceMetric metric,
                            uint64_t seed, const AttackOptions& opts = {});

Attack2Variant resolve_attack2_variant(Attack2Variant v, int attr_dim);

/// Exact 1-D 2-means over distances; the lower-mean cluster is labeled
/// positive. Throws DegenerateInputError when all distances are equal.
std::vector<bool> kmeans_binarize(const std::vector<double>& distances);

/// Supervised attacks (3, 6): trains the attack MLP on the partial-graph
/// train pairs with target-side features.
MlpModel train_supervised_attack(int attack_id, AttackContext& ctx,
                                 uint64_t seed, const AttackOptions& opts);

/// Transferring attacks (1, 5): trains shadow models on D' and the attack
/// MLP on dimension-consistent shadow features.
MlpModel train_transfer_attack(int attack_id, AttackContext& ctx,
                               uint64_t seed, const AttackOptions& opts);

/// Combined attacks (4, 7): shadow rows plus target partial-graph rows,
/// restricted to the transfer-consistent schema.
MlpModel train_combined_attack(int attack_id, AttackContext& ctx,
                               uint64_t seed, const AttackOptions& opts);

/// Dispatches on the knowledge triplet and scores the test pairs. Supervised
/// scores are the attack model's posterior probability of "linked".
/// `keep_blocks`, when given, zeroes all feature blocks outside the set at
/// evaluation time (feature-group ablation).
AttackScores run_attack(const KnowledgeTriplet& knowledge, AttackContext& ctx,
                        const std::vector<AttackPair>& test_pairs,
                        uint64_t seed, const AttackOptions& opts = {},
                        const std::set<FeatureBlock>* keep_blocks = nullptr);

}  // namespace linktheft
