#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linktheft/matrix.hpp"

namespace linktheft {

/// Undirected simple graph. Edges are stored once, canonically ordered
/// (u < v), sorted and deduplicated. Self-loops are never stored; the GCN
/// propagation rule adds its own self-connections.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  /// Builds a graph from raw endpoint pairs: canonicalizes, deduplicates,
  /// drops self-loops (counted into `dropped_self_loops` when given) and
  /// validates node ids.
  static Graph from_edges(int node_count,
                          const std::vector<std::pair<int, int>>& raw,
                          int* dropped_self_loops = nullptr);

  size_t edge_count() const { return edges.size(); }
  bool has_edge(int u, int v) const;
  std::vector<std::vector<int>> adjacency_list() const;
  std::vector<int> degrees() const;

  bool operator==(const Graph&) const = default;
};

/// Subset of a parent graph's edges; the adversary's known partial graph.
struct PartialGraph {
  std::vector<std::pair<int, int>> edges;  // canonical, sorted

  /// Throws IntegrityError if any edge is absent from the parent graph.
  void validate_against(const Graph& parent) const;
};

/// Symmetric normalized adjacency with self-connections added:
/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
/// Entries lie in [0, 1]; the matrix is exactly symmetric since the (u, v)
/// and (v, u) entries are computed by the same expression.
Matrix normalized_adjacency(const Graph& g);

/// Sparse fast path for the same operator (identical values, CSR layout).
Csr normalized_adjacency_csr(const Graph& g);

/// Row-normalized neighbor-mean operator without self-connections. Rows of
/// isolated nodes are all zero (their neighbor mean is the zero vector).
Csr neighbor_mean_csr(const Graph& g);

}  // namespace linktheft
