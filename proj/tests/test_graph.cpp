#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "agformer/errors.hpp"
#include "agformer/graph.hpp"
#include "agformer/tu_format.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace agf;
using testing::make_graph;

#ifndef AGF_DATA_DIR_DEFAULT
#define AGF_DATA_DIR_DEFAULT "data"
#endif

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// triangle (graph 1) + path (graph 2), 1-indexed nodes, one direction only
void write_fixture(const std::filesystem::path& dir, const std::string& a_txt = "1, 2\n2, 3\n3, 1\n4, 5\n5, 6\n") {
  write_file(dir / "FIX_A.txt", a_txt);
  write_file(dir / "FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
  write_file(dir / "FIX_graph_labels.txt", "1\n-1\n");
  write_file(dir / "FIX_node_labels.txt", "0\n1\n2\n0\n0\n1\n");
}

Tensor dense_adj(const Graph& g) {
  Tensor a(g.num_nodes(), g.num_nodes());
  for (auto [i, j] : g.edges()) a(i, j) = a(j, i) = 1.0;
  return a;
}

}  // namespace

TEST_SUITE("graph-data") {
  TEST_CASE("canonical form: symmetric, sorted, no self loops or duplicates") {
    Graph g = make_graph(4, {{1, 0}, {0, 1}, {2, 2}, {3, 1}, {1, 3}, {2, 0}});
    CHECK(g.num_edges() == 3);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});
    for (std::size_t i = 0; i < 4; ++i) {
      auto nb = g.neighbors(i);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (auto j : nb) CHECK(g.has_edge(j, i));
      CHECK(!g.has_edge(i, i));
    }
    const auto e = g.edges();
    CHECK(g.with_edges(e) == g);
  }

  TEST_CASE("graph validation") {
    CHECK_THROWS_AS(make_graph(3, {{0, 3}}), ValidationError);
    CHECK_THROWS_AS(Graph::from_edges(3, std::vector<Edge>{}, Tensor(2, 1), 0), ValidationError);
  }

  TEST_CASE("one-hot encoders") {
    const std::vector<int> labels{0, 1, 2};
    Tensor oh = one_hot_labels(labels, 3);
    CHECK(oh == Tensor::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
    Graph path = make_graph(3, {{0, 1}, {1, 2}});
    Tensor deg = one_hot_degrees(path, 4);
    CHECK(deg.cols() == 5);
    CHECK(deg(1, 2) == 1.0);
    CHECK(deg(0, 1) == 1.0);
    Graph star = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(one_hot_degrees(star, 2)(0, 2) == 1.0);  // clamped
  }

  TEST_CASE("normalized adjacency") {
    CHECK(normalized_adjacency(make_graph(1, {})).to_dense() == Tensor({1, 1}, {1.0}));
    Tensor pair = normalized_adjacency(make_graph(2, {{0, 1}})).to_dense();
    for (double v : pair.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    Tensor tri = normalized_adjacency(make_graph(3, {{0, 1}, {1, 2}, {0, 2}})).to_dense();
    for (double v : tri.data()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }

  TEST_CASE("normalized adjacency matches dense oracle and regular rows sum to one") {
    Graph g = synth_random_graph(30, 0.2, 3);
    const Tensor ref = oracle::gcn_norm(dense_adj(g));
    CHECK(max_abs_diff(normalized_adjacency(g).to_dense(), ref) < 1e-15);
    for (std::size_t n : {3u, 5u, 8u}) {
      std::vector<Edge> cyc;
      for (std::uint32_t i = 0; i < n; ++i) cyc.emplace_back(i, (i + 1) % n);
      Tensor a = normalized_adjacency(make_graph(n, cyc)).to_dense();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += a(i, j);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("synthetic random graphs") {
    CHECK(synth_random_graph(2, 1.0, 1).num_edges() == 1);
    Graph g = synth_random_graph(1000, 0.01, 42);
    const double mean = 4995.0, sd = std::sqrt(499500 * 0.01 * 0.99);
    CHECK(std::abs(static_cast<double>(g.num_edges()) - mean) < 4 * sd);
    CHECK(synth_random_graph(1000, 0.01, 42).edges() == g.edges());
    CHECK(synth_random_graph(1000, 0.01, 43).edges() != g.edges());
    CHECK(g.features().rows() == 1000);
  }

  TEST_CASE("flip edges") {
    Graph path = make_graph(3, {{0, 1}, {1, 2}});
    CHECK(flip_edges(path, 0.0, 1) == path);
    Graph tri = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(flip_edges(tri, 0.7, 1) == tri);
    Graph p2 = flip_edges(path, 0.5, 1);
    CHECK(p2.num_edges() == 3);
    CHECK(p2.has_edge(0, 2));
    CHECK_THROWS_AS(flip_edges(path, 1.5, 1), ConfigError);
  }

  TEST_CASE("flip edges count and superset property") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      Graph g = synth_random_graph(25 + s, 0.15, s);
      for (double rate : {0.05, 0.1, 0.2, 0.9}) {
        Graph f = flip_edges(g, rate, s * 31 + 1);
        const std::size_t m = g.num_edges();
        const std::size_t nonedges = g.num_nodes() * (g.num_nodes() - 1) / 2 - m;
        const auto want = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(m) - 1e-9));
        CHECK(f.num_edges() == m + std::min(want, nonedges));
        for (auto [i, j] : g.edges()) CHECK(f.has_edge(i, j));
        CHECK(flip_edges(g, rate, s * 31 + 1) == f);
      }
    }
  }

  TEST_CASE("stratified k-fold") {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    auto folds = stratified_kfold(labels, 5, 3);
    REQUIRE(folds.size() == 5);
    for (const auto& f : folds) {
      REQUIRE(f.test.size() == 2);
      CHECK(labels[f.test[0]] != labels[f.test[1]]);
    }
    CHECK_THROWS_AS(stratified_kfold(labels, 6, 3), ConfigError);
    CHECK_THROWS_AS(stratified_kfold(labels, 1, 3), ConfigError);
  }

  TEST_CASE("stratified k-fold partitions the index set") {
    std::vector<int> labels;
    for (int i = 0; i < 57; ++i) labels.push_back(i % 3 == 0 ? 2 : i % 2);
    auto folds = stratified_kfold(labels, 4, 9);
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : folds) {
      for (auto i : f.test) ++seen[i];
      CHECK(f.train.size() + f.test.size() == labels.size());
      std::set<std::size_t> tr(f.train.begin(), f.train.end());
      for (auto i : f.test) CHECK(tr.count(i) == 0);
    }
    for (int s : seen) CHECK(s == 1);
    for (int c = 0; c < 3; ++c) {
      std::vector<std::size_t> per;
      for (const auto& f : folds) per.push_back(std::count_if(f.test.begin(), f.test.end(), [&](auto i) { return labels[i] == c; }));
      CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
    }
    CHECK(stratified_kfold(labels, 4, 9)[2].test == folds[2].test);
  }

  TEST_CASE("TU loader on a hand-written fixture") {
    auto dir = testing::scratch_dir("tu_fixture");
    write_fixture(dir);
    DatasetBundle b = load_tu_dataset(dir, "FIX");
    REQUIRE(b.graphs.size() == 2);
    CHECK(b.graphs[0].num_nodes() == 3);
    CHECK(b.graphs[1].num_nodes() == 3);
    CHECK(b.graphs[0].num_edges() == 3);
    CHECK(b.graphs[1].num_edges() == 2);
    CHECK(b.graphs[1].has_edge(1, 0));
    CHECK(b.num_classes == 2);
    CHECK(b.graphs[0].label() == 1);  // raw 1 -> 1, raw -1 -> 0
    CHECK(b.graphs[1].label() == 0);
    CHECK(b.feature_dim == 3);
  }

  TEST_CASE("TU loader errors") {
    auto dir = testing::scratch_dir("tu_errors");
    CHECK_THROWS_AS(load_tu_dataset(dir, "FIX"), IoError);
    write_fixture(dir, "1, 2\n2, 9\n");
    try {
      load_tu_dataset(dir, "FIX");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    write_fixture(dir, "1, 2\n3, 4\n");
    CHECK_THROWS_AS(load_tu_dataset(dir, "FIX"), ValidationError);
  }

  TEST_CASE("TU round trip") {
    auto dir = testing::scratch_dir("tu_roundtrip");
    write_fixture(dir);
    DatasetBundle b = load_tu_dataset(dir, "FIX");
    auto out = testing::scratch_dir("tu_roundtrip_out");
    write_tu_dataset(b, out, "RT");
    DatasetBundle r = load_tu_dataset(out, "RT");
    REQUIRE(r.graphs.size() == b.graphs.size());
    for (std::size_t i = 0; i < r.graphs.size(); ++i) CHECK(r.graphs[i] == b.graphs[i]);
    CHECK(r.num_classes == b.num_classes);
  }

  TEST_CASE("MUTAG statistics") {
    DatasetBundle b = load_named_dataset(AGF_DATA_DIR_DEFAULT, "mutag");
    CHECK(b.graphs.size() == 188);
    CHECK(b.num_classes == 2);
    std::size_t total = 0, mx = 0;
    for (const auto& g : b.graphs) {
      total += g.num_nodes();
      mx = std::max(mx, g.num_nodes());
    }
    CHECK(static_cast<double>(total) / 188.0 == doctest::Approx(17.93).epsilon(0.01 / 17.93));
    CHECK(mx == 28);

    // distinct atom labels straight from the raw file
    std::ifstream in(std::filesystem::path(AGF_DATA_DIR_DEFAULT) / "MUTAG" / "MUTAG_node_labels.txt");
    std::set<int> distinct;
    for (int v; in >> v;) distinct.insert(v);
    CHECK(b.feature_dim == distinct.size());

    auto folds = stratified_kfold(b.labels(), 10, 42);
    for (const auto& f : folds) CHECK((f.test.size() == 18 || f.test.size() == 19));
  }
}
