#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "linktheft/matrix.hpp"

namespace linktheft {

/// The eight distance metrics, in canonical schema order.
enum class DistanceMetric {
  kCosine,
  kEuclidean,
  kCorrelation,
  kChebyshev,
  kBraycurtis,
  kManhattan,
  kCanberra,
  kSqeuclidean,
};
inline constexpr int kNumDistanceMetrics = 8;
inline constexpr std::array<DistanceMetric, kNumDistanceMetrics> kAllMetrics{
    DistanceMetric::kCosine,     DistanceMetric::kEuclidean,
    DistanceMetric::kCorrelation, DistanceMetric::kChebyshev,
    DistanceMetric::kBraycurtis, DistanceMetric::kManhattan,
    DistanceMetric::kCanberra,   DistanceMetric::kSqeuclidean,
};

std::string metric_name(DistanceMetric m);
std::optional<DistanceMetric> metric_from_name(const std::string& name);

/// d(a, b). Symmetric; finite on degenerate inputs (zero vectors, constant
/// vectors, 0/0 Canberra terms) via fixed conventions.
double distance(DistanceMetric metric, std::span<const double> a,
                std::span<const double> b);

/// The four pairwise vector operations, in canonical schema order.
enum class PairwiseOp { kAverage, kHadamard, kWeightedL1, kWeightedL2 };
inline constexpr int kNumPairwiseOps = 4;
inline constexpr std::array<PairwiseOp, kNumPairwiseOps> kAllPairwiseOps{
    PairwiseOp::kAverage, PairwiseOp::kHadamard, PairwiseOp::kWeightedL1,
    PairwiseOp::kWeightedL2};

std::vector<double> pairwise_op(PairwiseOp op, std::span<const double> a,
                                std::span<const double> b);

/// Shannon entropy -sum p_i ln p_i with 0 ln 0 := 0.
double entropy(std::span<const double> p);

/// Feature blocks in canonical order. f = target-model posteriors,
/// g = reference-model posteriors, attr = node attributes; "psi" blocks are
/// the four pairwise operations, "ent_psi" the four operations applied to
/// the two posterior entropies.
enum class FeatureBlock {
  kFDist,
  kFPsi,
  kFEntPsi,
  kGDist,
  kGPsi,
  kGEntPsi,
  kAttrDist,
  kAttrPsi,
};

std::string block_name(FeatureBlock b);
std::optional<FeatureBlock> block_from_name(const std::string& name);

struct BlockSpan {
  FeatureBlock block;
  int offset = 0;
  int length = 0;
};

/// Per-attack feature layout. Transferring attacks (1, 4, 5, 7) use only
/// blocks whose width is independent of class count and attribute dimension,
/// which keeps the attack model's input dimension consistent across shadow
/// and target datasets.
struct FeatureSchema {
  int attack_id = -1;
  std::vector<BlockSpan> blocks;
  int dim = 0;

  static FeatureSchema for_attack(int attack_id, int num_classes,
                                  int attr_dim);

  bool has_block(FeatureBlock b) const;
  const BlockSpan* find(FeatureBlock b) const;

  /// Zeroes every entry outside the kept blocks (evaluation-time ablation).
  void mask_outside(std::vector<double>& features,
                    const std::set<FeatureBlock>& keep) const;
};

/// Per-pair artifacts a schema draws from. Posterior matrices are indexed by
/// node id; attrs likewise.
struct PairFeatureContext {
  const Matrix* f_posteriors = nullptr;
  const Matrix* g_posteriors = nullptr;
  const Matrix* attrs = nullptr;
};

/// Assembles the feature vector for pair (u, v). All blocks are symmetric in
/// (u, v) by construction. Throws KnowledgeError when the schema needs an
/// artifact the context lacks, ShapeError when dims disagree with the schema.
std::vector<double> assemble(const FeatureSchema& schema, int u, int v,
                             const PairFeatureContext& ctx);

/// Convenience overload: schema derived from the context dimensions.
std::vector<double> assemble(int attack_id, int u, int v,
                             const PairFeatureContext& ctx);

/// CSV export with a schema-derived header (block.index columns).
void write_features_csv(std::ostream& out, const FeatureSchema& schema,
                        const std::vector<std::vector<double>>& rows);

}  // namespace linktheft
