#include "linktheft/toy.hpp"

#include <algorithm>

#include "linktheft/errors.hpp"
#include "linktheft/rng.hpp"

namespace linktheft {

Dataset two_clique_dataset() {
  Dataset ds;
  ds.name = "two_clique";
  std::vector<std::pair<int, int>> edges;
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) edges.emplace_back(base + i, base + j);
  ds.graph = Graph::from_edges(8, edges);
  ds.attributes = Matrix(8, 2);
  ds.labels.resize(8);
  for (int i = 0; i < 8; ++i) {
    const int comp = i / 4;
    ds.attributes.at(i, comp) = 1.0;
    ds.labels[i] = comp;
  }
  ds.num_classes = 2;
  ds.validate();
  return ds;
}

Dataset path_dataset(int n) {
  if (n < 2) throw ConfigError("path needs at least 2 nodes");
  Dataset ds;
  ds.name = "path" + std::to_string(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  ds.graph = Graph::from_edges(n, edges);
  ds.attributes = Matrix(n, n);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.attributes.at(i, i) = 1.0;
    ds.labels[i] = i % 2;
  }
  ds.num_classes = 2;
  ds.validate();
  return ds;
}

Dataset star_dataset(int leaves) {
  if (leaves < 1) throw ConfigError("star needs at least 1 leaf");
  const int n = leaves + 1;
  Dataset ds;
  ds.name = "star" + std::to_string(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
  ds.graph = Graph::from_edges(n, edges);
  ds.attributes = Matrix(n, 2);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.attributes.at(i, i == 0 ? 0 : 1) = 1.0;
    ds.labels[i] = i == 0 ? 0 : 1;
  }
  ds.num_classes = 2;
  ds.validate();
  return ds;
}

Dataset planted_partition_dataset(const PlantedPartitionParams& params) {
  if (params.communities < 2 || params.community_size < 2)
    throw ConfigError("planted partition needs >= 2 communities of >= 2 nodes");
  const int k = params.communities;
  const int n = k * params.community_size;
  const int attr_dim = params.attr_dim > 0 ? params.attr_dim : k;

  Rng rng(params.seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const bool same = u / params.community_size == v / params.community_size;
      if (rng.next_double() < (same ? params.p_in : params.p_out))
        edges.emplace_back(u, v);
    }
  }

  Dataset ds;
  ds.name = "planted_k" + std::to_string(k) + "_n" + std::to_string(n);
  ds.graph = Graph::from_edges(n, edges);
  ds.attributes = Matrix(n, attr_dim);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int comm = i / params.community_size;
    ds.labels[i] = comm;
    for (int j = 0; j < attr_dim; ++j) {
      const double signal = (j % k) == comm ? 1.0 : 0.0;
      ds.attributes.at(i, j) =
          signal + params.attr_noise * (rng.next_double() - 0.5);
    }
  }
  ds.num_classes = k;
  ds.validate();
  return ds;
}

}  // namespace linktheft
