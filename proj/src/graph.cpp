#include "agformer/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <unordered_set>

#include "agformer/errors.hpp"
#include "agformer/rng.hpp"

namespace agf {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, Tensor features, int label,
                        std::vector<int> node_labels) {
  if (features.rows() != num_nodes) {
    throw ValidationError("graph features have " + std::to_string(features.rows()) + " rows for " +
                          std::to_string(num_nodes) + " nodes");
  }
  if (!node_labels.empty() && node_labels.size() != num_nodes) {
    throw ValidationError("graph has " + std::to_string(node_labels.size()) + " node labels for " +
                          std::to_string(num_nodes) + " nodes");
  }
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw ValidationError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range for " +
                            std::to_string(num_nodes) + " nodes");
    }
    if (a == b) continue;
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.num_nodes_ = num_nodes;
  g.offsets_.assign(num_nodes + 1, 0);
  for (const auto& e : directed) ++g.offsets_[e.first + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.neighbors_.reserve(directed.size());
  for (const auto& e : directed) g.neighbors_.push_back(e.second);
  g.features_ = std::move(features);
  g.label_ = label;
  g.node_labels_ = std::move(node_labels);
  return g;
}

std::size_t Graph::max_degree() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < num_nodes_; ++i) m = std::max(m, degree(i));
  return m;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    for (auto j : neighbors(i)) {
      if (i < j) out.emplace_back(static_cast<std::uint32_t>(i), j);
    }
  }
  return out;
}

Graph Graph::with_features(Tensor features) const {
  if (features.rows() != num_nodes_) throw ValidationError("with_features: row count does not match node count");
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_edges(std::span<const Edge> edges) const {
  return from_edges(num_nodes_, edges, features_, label_, node_labels_);
}

std::vector<int> DatasetBundle::labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label());
  return out;
}

Tensor one_hot_labels(std::span<const int> labels, std::size_t num_labels) {
  Tensor t(labels.size(), num_labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_labels) {
      throw ValidationError("node label " + std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(num_labels) + ")");
    }
    t(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return t;
}

Tensor one_hot_degrees(const Graph& g, std::size_t max_degree) {
  Tensor t(g.num_nodes(), max_degree + 1);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) t(i, std::min(g.degree(i), max_degree)) = 1.0;
  return t;
}

SparseMatrix normalized_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_offsets.assign(1, 0);
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  for (std::size_t i = 0; i < n; ++i) {
    bool self_done = false;
    for (auto j : g.neighbors(i)) {
      if (!self_done && j > i) {
        m.col_indices.push_back(static_cast<std::uint32_t>(i));
        m.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
        self_done = true;
      }
      m.col_indices.push_back(j);
      m.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    if (!self_done) {
      m.col_indices.push_back(static_cast<std::uint32_t>(i));
      m.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
    }
    m.row_offsets.push_back(m.col_indices.size());
  }
  return m;
}

SparseMatrix adjacency_operator(const Graph& g) {
  SparseMatrix m;
  m.rows = m.cols = g.num_nodes();
  m.row_offsets.assign(1, 0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    for (auto j : g.neighbors(i)) {
      m.col_indices.push_back(j);
      m.values.push_back(1.0);
    }
    m.row_offsets.push_back(m.col_indices.size());
  }
  return m;
}

Graph synth_random_graph(std::size_t n, double edge_rate, std::uint64_t seed) {
  if (n < 2) throw ConfigError("synth_random_graph: need at least 2 nodes");
  if (!(edge_rate > 0.0 && edge_rate <= 1.0)) throw ConfigError("synth_random_graph: edge rate must be in (0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  // Geometric skipping over the pairs (v, w), w < v, in row order.
  const double log_q = std::log1p(-edge_rate);
  std::int64_t v = 1, w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = uniform01(rng);
    const double skip = edge_rate >= 1.0 ? 0.0 : std::floor(std::log1p(-r) / log_q);
    w += 1 + static_cast<std::int64_t>(skip);
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.emplace_back(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(v));
  }
  Graph g = Graph::from_edges(n, edges, Tensor(n, 0), 0);
  return g.with_features(one_hot_degrees(g, g.max_degree()));
}

Graph flip_edges(const Graph& g, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("flip_edges: rate must be in [0, 1]");
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  // tolerance keeps e.g. 0.15 * 20 from rounding up to 4
  const auto requested = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(m) - 1e-9));
  if (requested == 0) return g;
  const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t available = pairs - m;
  std::vector<Edge> edges = g.edges();
  Rng rng(seed);
  if (requested >= available) {
    if (requested > available) {
      std::cerr << "warning: flip_edges requested " << requested << " new edges but only " << available
                << " non-edges exist; adding all of them\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!g.has_edge(i, j)) edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
    return g.with_edges(edges);
  }
  if (available <= 4 * requested || pairs <= (1u << 21)) {
    std::vector<Edge> candidates;
    candidates.reserve(available);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!g.has_edge(i, j)) candidates.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
    // partial Fisher-Yates: the first `requested` slots are a uniform sample
    for (std::size_t i = 0; i < requested; ++i) {
      const auto j = i + uniform_index(rng, candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      edges.push_back(candidates[i]);
    }
    return g.with_edges(edges);
  }
  std::unordered_set<std::uint64_t> chosen;
  while (chosen.size() < requested) {
    auto a = uniform_index(rng, n);
    auto b = uniform_index(rng, n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (g.has_edge(a, b)) continue;
    if (chosen.insert(a * n + b).second) {
      edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
    }
  }
  return g.with_edges(edges);
}

std::vector<FoldSplit> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: need k >= 2, got " + std::to_string(k));
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw ConfigError("stratified_kfold: class " + std::to_string(label) + " has " +
                        std::to_string(members.size()) + " members, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> tests(k);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    shuffle(members.begin(), members.end(), rng);
    for (auto idx : members) tests[next++ % k].push_back(idx);
  }
  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(tests[f].begin(), tests[f].end());
    std::vector<bool> in_test(labels.size(), false);
    for (auto idx : tests[f]) in_test[idx] = true;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!in_test[i]) folds[f].train.push_back(i);
    }
    folds[f].test = std::move(tests[f]);
  }
  return folds;
}

std::uint64_t graph_hash(const Graph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(g.num_nodes());
  for (const auto& [a, b] : g.edges()) {
    mix(a);
    mix(b);
  }
  return h;
}

}  // namespace agf
