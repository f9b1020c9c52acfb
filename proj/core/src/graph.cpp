#include "linktheft/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linktheft/errors.hpp"

namespace linktheft {

Graph Graph::from_edges(int node_count,
                        const std::vector<std::pair<int, int>>& raw,
                        int* dropped_self_loops) {
  Graph g;
  g.node_count = node_count;
  g.edges.reserve(raw.size());
  int dropped = 0;
  for (auto [u, v] : raw) {
    if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
      throw IntegrityError("edge (" + std::to_string(u) + ", " +
                           std::to_string(v) + ") references a node outside [0, " +
                           std::to_string(node_count) + ")");
    }
    if (u == v) {
      ++dropped;
      continue;
    }
    if (u > v) std::swap(u, v);
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  if (dropped_self_loops) *dropped_self_loops = dropped;
  return g;
}

bool Graph::has_edge(int u, int v) const {
  if (u == v) return false;
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

std::vector<std::vector<int>> Graph::adjacency_list() const {
  std::vector<std::vector<int>> adj(node_count);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(node_count, 0);
  for (auto [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

void PartialGraph::validate_against(const Graph& parent) const {
  for (auto [u, v] : edges) {
    if (!parent.has_edge(u, v)) {
      throw IntegrityError("partial graph edge (" + std::to_string(u) + ", " +
                           std::to_string(v) + ") is not in the parent graph");
    }
  }
}

Csr normalized_adjacency_csr(const Graph& g) {
  const int n = g.node_count;
  std::vector<double> inv_sqrt_deg(n);
  {
    std::vector<int> deg = g.degrees();
    for (int i = 0; i < n; ++i)
      inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]) + 1.0);
  }
  auto adj = g.adjacency_list();
  Csr m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    adj[i].push_back(i);  // self-connection
    std::sort(adj[i].begin(), adj[i].end());
    m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(adj[i].size());
  }
  m.col_idx.reserve(m.row_ptr[n]);
  m.vals.reserve(m.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    for (int j : adj[i]) {
      m.col_idx.push_back(j);
      m.vals.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  }
  return m;
}

Matrix normalized_adjacency(const Graph& g) {
  return to_dense(normalized_adjacency_csr(g));
}

Csr neighbor_mean_csr(const Graph& g) {
  const int n = g.node_count;
  auto adj = g.adjacency_list();
  Csr m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(adj[i].size());
  }
  m.col_idx.reserve(m.row_ptr[n]);
  m.vals.reserve(m.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    const double w = adj[i].empty() ? 0.0 : 1.0 / adj[i].size();
    for (int j : adj[i]) {
      m.col_idx.push_back(j);
      m.vals.push_back(w);
    }
  }
  return m;
}

}  // namespace linktheft
