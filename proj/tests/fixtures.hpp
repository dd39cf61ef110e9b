// Small graphs (N <= 8) used for the Louvain and modularity oracle checks.
#pragma once

#include <string>
#include <vector>

#include "helpers.hpp"

namespace testing {

struct NamedGraph {
  std::string name;
  agf::Graph graph;
};

inline std::vector<NamedGraph> small_fixtures() {
  std::vector<NamedGraph> out;
  out.push_back({"two_triangles", two_triangles()});
  out.push_back({"two_cliques_bridge", two_cliques_bridge()});
  out.push_back({"k4", make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})});
  out.push_back({"path5", make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}})});
  out.push_back({"star6", make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}})});
  out.push_back({"cycle8", make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 0}})});
  out.push_back({"two_squares", make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {3, 4}})});
  out.push_back({"barbell_k4", make_graph(8, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
                                              {4, 5}, {4, 6}, {4, 7}, {5, 6}, {5, 7}, {6, 7}, {3, 4}})});
  out.push_back({"isolated_plus_edge", make_graph(4, {{1, 2}})});
  out.push_back({"triangle_tail", make_graph(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}})});
  for (std::uint64_t s = 0; s < 10; ++s) {
    agf::Graph g = agf::synth_random_graph(5 + s % 4, 0.45, 100 + s);
    if (g.num_edges() > 0) out.push_back({"random_" + std::to_string(s), g});
  }
  return out;
}

}  // namespace testing
