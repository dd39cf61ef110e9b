#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "agformer/anchors.hpp"
#include "agformer/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace agf;
using testing::make_graph;

namespace {

Tensor dense_adj(const Graph& g) {
  Tensor a(g.num_nodes(), g.num_nodes());
  for (auto [i, j] : g.edges()) a(i, j) = a(j, i) = 1.0;
  return a;
}

Partition from_assignment(std::vector<std::uint32_t> a) { return canonical_partition(a); }

}  // namespace

TEST_SUITE("anchor-gen") {
  TEST_CASE("louvain on hand-computed fixtures") {
    Partition p = louvain(testing::two_triangles());
    CHECK(p.num_communities == 2);
    CHECK(p.assignment == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
    CHECK(modularity(testing::two_triangles(), p) == doctest::Approx(0.5).epsilon(1e-14));

    Partition b = louvain(testing::two_cliques_bridge());
    CHECK(b.assignment == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
    CHECK(modularity(testing::two_cliques_bridge(), b) == doctest::Approx(5.0 / 14.0).epsilon(1e-14));

    Graph k4 = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    Partition k = louvain(k4);
    CHECK(k.num_communities == 1);
    CHECK(std::abs(modularity(k4, k)) < 1e-15);
  }

  TEST_CASE("louvain edge cases") {
    CHECK(louvain(make_graph(1, {})).num_communities == 1);
    Partition empty = louvain(make_graph(3, {}));
    CHECK(empty.num_communities == 3);
    // components never merge
    Partition iso = louvain(make_graph(4, {{1, 2}}));
    CHECK(iso.assignment[1] == iso.assignment[2]);
    CHECK(iso.assignment[0] != iso.assignment[1]);
    CHECK(iso.assignment[3] != iso.assignment[1]);
    Graph g = synth_random_graph(200, 0.03, 5);
    CHECK(louvain(g).assignment == louvain(g).assignment);
  }

  TEST_CASE("modularity matches dense oracle on every partition of small graphs") {
    for (const auto& [name, g] : testing::small_fixtures()) {
      if (g.num_nodes() > 7) continue;  // Bell(8) enumeration is covered by the acceptance suite
      const Tensor a = dense_adj(g);
      oracle::for_each_set_partition(g.num_nodes(), [&](const std::vector<std::uint32_t>& asg) {
        const double ours = modularity(g, from_assignment(asg));
        CHECK_MESSAGE(std::abs(ours - oracle::modularity(a, asg)) < 1e-12, name);
      });
    }
  }

  TEST_CASE("modularity properties") {
    Graph g = synth_random_graph(20, 0.3, 2);
    CHECK(std::abs(modularity(g, Partition{std::vector<std::uint32_t>(20, 0), 1})) < 1e-14);
    CHECK_THROWS_AS(modularity(make_graph(3, {}), Partition{{0, 0, 0}, 1}), ValidationError);
  }

  TEST_CASE("louvain is near the brute-force optimum") {
    for (const auto& [name, g] : testing::small_fixtures()) {
      if (g.num_nodes() > 7) continue;
      const Tensor a = dense_adj(g);
      double best = -1.0;
      oracle::for_each_set_partition(g.num_nodes(), [&](const std::vector<std::uint32_t>& asg) {
        best = std::max(best, oracle::modularity(a, asg));
      });
      const double q = modularity(g, louvain(g));
      CHECK_MESSAGE(q <= best + 1e-12, name);
      CHECK_MESSAGE(best - q < 0.05, name);
    }
  }

  TEST_CASE("random partition") {
    CHECK(random_partition(7, 1, 3).assignment == std::vector<std::uint32_t>(7, 0));
    Partition id = random_partition(6, 6, 3);
    CHECK(id.num_communities == 6);
    CHECK(std::set<std::uint32_t>(id.assignment.begin(), id.assignment.end()).size() == 6);
    CHECK(random_partition(100, 4, 9).assignment == random_partition(100, 4, 9).assignment);
    CHECK(random_partition(100, 4, 9).assignment != random_partition(100, 4, 10).assignment);
    CHECK_THROWS_AS(random_partition(3, 4, 1), ConfigError);
    CHECK_THROWS_AS(random_partition(3, 0, 1), ConfigError);
    for (std::uint64_t s = 0; s < 200; ++s) {
      Partition p = random_partition(5, 4, s);
      std::vector<int> counts(4, 0);
      for (auto c : p.assignment) ++counts[c];
      for (int c : counts) CHECK(c > 0);
    }
  }

  TEST_CASE("random partition is uniform over surjections") {
    // n=4, c=2: 14 surjections, each labeled set partition (up to canonical
    // relabeling: 7 unordered splits) should appear about equally often.
    std::map<std::vector<std::uint32_t>, int> seen;
    const int trials = 14000;
    for (int s = 0; s < trials; ++s) {
      auto p = random_partition(4, 2, static_cast<std::uint64_t>(s));
      seen[canonical_partition(p.assignment).assignment]++;
    }
    CHECK(seen.size() == 7);
    for (const auto& [k, v] : seen) CHECK(std::abs(v - 2000) < 4 * 40);  // sd ~ sqrt(14000*1/7*6/7) ~ 41
  }

  TEST_CASE("assignment matrix") {
    AnchorAssignment s = assignment_matrix(Partition{{0, 0, 1}, 2});
    CHECK(s.dense() == Tensor::from_rows({{1, 1, 0}, {0, 0, 1}}));
    CHECK(s.community_sizes == std::vector<std::size_t>{2, 1});
    CHECK(s.mean_pooling().to_dense() == Tensor::from_rows({{0.5, 0.5, 0}, {0, 0, 1}}));
    CHECK_THROWS_AS(assignment_matrix(Partition{{0, 0, 2}, 3}), ValidationError);

    Partition perm{{2, 0, 1}, 3};
    Tensor d = assignment_matrix(perm).dense();
    for (std::size_t j = 0; j < 3; ++j) {
      double col = 0, row = 0;
      for (std::size_t c = 0; c < 3; ++c) col += d(c, j), row += d(j, c);
      CHECK(col == 1.0);
      CHECK(row == 1.0);
    }
  }

  TEST_CASE("assignment matrix columns sum to one on louvain output") {
    Graph g = synth_random_graph(60, 0.08, 11);
    Partition p = louvain(g);
    AnchorAssignment s = assignment_matrix(p);
    Tensor d = s.dense();
    for (std::size_t j = 0; j < 60; ++j) {
      double col = 0;
      for (std::size_t c = 0; c < p.num_communities; ++c) col += d(c, j);
      CHECK(col == 1.0);
    }
    for (std::size_t c = 0; c < p.num_communities; ++c) {
      double row = 0;
      for (std::size_t j = 0; j < 60; ++j) row += d(c, j);
      CHECK(row == static_cast<double>(s.community_sizes[c]));
    }
    // relabeling round trip
    std::vector<std::uint32_t> back(60);
    for (std::size_t j = 0; j < 60; ++j)
      for (std::size_t c = 0; c < p.num_communities; ++c)
        if (d(c, j) == 1.0) back[j] = static_cast<std::uint32_t>(c);
    CHECK(canonical_partition(back).assignment == canonical_partition(p.assignment).assignment);
  }
}
