#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agformer/sparse.hpp"
#include "agformer/tensor.hpp"

namespace agf {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Undirected simple graph in canonical CSR form: symmetric, no self-loops,
// no duplicate edges, neighbor lists sorted ascending. Immutable once built.
class Graph {
 public:
  Graph() = default;

  // Canonicalizes `edges` (either direction, duplicates and self-loops
  // allowed). `features` must have num_nodes rows. `node_labels` is empty or
  // one categorical label per node.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges, Tensor features, int label,
                          std::vector<int> node_labels = {});

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t max_degree() const;
  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], degree(i)};
  }
  bool has_edge(std::size_t i, std::size_t j) const;
  // Each undirected edge once, as (i, j) with i < j, in lexicographic order.
  std::vector<Edge> edges() const;

  const Tensor& features() const { return features_; }
  int label() const { return label_; }
  const std::vector<int>& node_labels() const { return node_labels_; }

  Graph with_features(Tensor features) const;
  Graph with_edges(std::span<const Edge> edges) const;

  bool operator==(const Graph&) const = default;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
  Tensor features_;
  int label_ = 0;
  std::vector<int> node_labels_;
};

struct DatasetBundle {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  // Raw values from the source files; index = remapped id.
  std::vector<int> class_values;
  std::vector<int> node_label_values;

  std::vector<int> labels() const;
};

// One-hot rows for categorical node labels in [0, num_labels).
Tensor one_hot_labels(std::span<const int> labels, std::size_t num_labels);
// One-hot of min(degree, max_degree); width max_degree + 1.
Tensor one_hot_degrees(const Graph& g, std::size_t max_degree);

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const Graph& g);
// Plain 0/1 adjacency (neighbor sum).
SparseMatrix adjacency_operator(const Graph& g);

// Each unordered pair is an edge independently with probability edge_rate.
// Features are degree one-hot against the graph's own maximum degree.
Graph synth_random_graph(std::size_t n, double edge_rate, std::uint64_t seed);

// Adds ceil(rate * |E|) distinct non-edges chosen uniformly at random. When
// fewer non-edges exist, all are added and a warning is written to stderr.
Graph flip_edges(const Graph& g, double rate, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

std::vector<FoldSplit> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

// FNV-1a over node count and edge list; for logging structural identity.
std::uint64_t graph_hash(const Graph& g);

}  // namespace agf
