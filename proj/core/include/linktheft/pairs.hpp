#pragma once

#include <cstdint>
#include <vector>

#include "linktheft/dataset.hpp"
#include "linktheft/graph.hpp"

namespace linktheft {

struct NodePair {
  int u = 0;
  int v = 0;
  bool operator==(const NodePair&) const = default;
};

enum class Split { kTrain, kTest };

struct AttackPair {
  int u = 0;
  int v = 0;
  bool linked = false;
  Split split = Split::kTrain;
};

/// Balanced labeled node pairs: every edge of the source graph as a positive
/// plus the same number of distinct sampled non-edges as negatives.
struct AttackPairSet {
  std::vector<AttackPair> pairs;

  size_t positive_count() const;
  size_t negative_count() const;
  std::vector<AttackPair> train_pairs() const;
  std::vector<AttackPair> test_pairs() const;
  /// Positive train pairs form the adversary's known partial graph.
  PartialGraph train_partial_graph() const;
};

/// Uniform sample of floor(fraction * node_count) distinct nodes whose labels
/// supervise training. Every sampled node must be labeled.
std::vector<int> sample_labeled_nodes(const Dataset& ds, double fraction,
                                      uint64_t seed);

/// All positive edges plus an equal number of uniformly sampled distinct
/// negative pairs. Rejection sampling with an exhaustive fallback for dense
/// graphs. Throws SamplingError when fewer non-edges than edges exist.
AttackPairSet build_attack_pairs(const Graph& g, uint64_t seed);

/// Randomly tags floor(train_fraction * size) pairs as train, rest as test.
void split_pairs(AttackPairSet& set, double train_fraction, uint64_t seed);

}  // namespace linktheft
