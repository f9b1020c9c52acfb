#pragma once

#include <string>
#include <vector>

#include "linktheft/graph.hpp"
#include "linktheft/matrix.hpp"

namespace linktheft {

/// A node-classification dataset: graph + node attribute matrix + (possibly
/// partial) node labels. Immutable after construction.
struct Dataset {
  std::string name;
  Graph graph;
  Matrix attributes;        // node_count x attr_dim
  std::vector<int> labels;  // node_count entries, -1 = unlabeled
  int num_classes = 0;

  int node_count() const { return graph.node_count; }
  int attr_dim() const { return attributes.cols; }
  bool has_label(int node) const { return labels[node] >= 0; }

  /// Throws IntegrityError / ConfigError on inconsistent fields.
  void validate() const;
};

/// Loads a dataset from its three component files.
///   edges:  whitespace-separated integer pairs, one per line
///   attrs:  CSV, row i = attributes of node i
///   labels: CSV lines "node_id,class_id"
/// Self-loops in the edge file are dropped; a note per loop is appended to
/// `warnings` when given. Node count is the attribute row count.
Dataset load_dataset(const std::string& graph_path,
                     const std::string& attr_path,
                     const std::string& label_path, int num_classes,
                     const std::string& name = "",
                     std::vector<std::string>* warnings = nullptr);

/// Loads a bundle directory: edges.txt, attrs.csv, labels.csv, meta.json.
Dataset load_bundle(const std::string& dir,
                    std::vector<std::string>* warnings = nullptr);

/// Writes a dataset in the bundle layout (used by tests and toy generators).
void write_bundle(const Dataset& ds, const std::string& dir);

}  // namespace linktheft
