#pragma once

#include <cstdint>

#include "linktheft/dataset.hpp"

namespace linktheft {

/// Two disjoint K4 cliques; attributes are the one-hot component id and the
/// label is the component. Linearly separable, so trained models classify it
/// perfectly and linked pairs have near-identical posteriors.
Dataset two_clique_dataset();

/// Path 0-1-...-(n-1) with one-hot position attributes, labels alternate.
Dataset path_dataset(int n);

/// Star with `leaves` leaves around node 0.
Dataset star_dataset(int leaves);

struct PlantedPartitionParams {
  int communities = 3;
  int community_size = 20;
  double p_in = 0.3;    // intra-community edge probability
  double p_out = 0.01;  // inter-community edge probability
  double attr_noise = 0.2;
  int attr_dim = 0;  // 0 = one column per community
  uint64_t seed = 0;
};

/// Planted-partition graph whose attributes are a noisy one-hot community
/// indicator and whose labels are the community ids. Citation-like at desk
/// scale: GCNs separate the communities and most links are intra-community.
Dataset planted_partition_dataset(const PlantedPartitionParams& params);

}  // namespace linktheft
