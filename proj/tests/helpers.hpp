#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "agformer/graph.hpp"
#include "agformer/rng.hpp"
#include "agformer/tensor.hpp"

namespace testing {

inline agf::Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  agf::Rng rng(seed);
  agf::Tensor t(r, c);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = lo + (hi - lo) * agf::uniform01(rng);
  return t;
}

inline agf::Graph make_graph(std::size_t n, std::vector<agf::Edge> edges, std::size_t feat_dim = 0, int label = 0) {
  agf::Tensor x = feat_dim == 0 ? agf::Tensor(n, 1, 1.0) : random_tensor(n, feat_dim, 7 + n);
  return agf::Graph::from_edges(n, edges, std::move(x), label);
}

inline agf::Graph two_triangles() { return make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }

inline agf::Graph two_cliques_bridge() {
  return make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
}

// Per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("agf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
