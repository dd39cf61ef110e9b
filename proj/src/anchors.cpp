#include "agformer/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "agformer/errors.hpp"
#include "agformer/rng.hpp"

namespace agf {

namespace {

constexpr double kMinGain = 1e-7;
constexpr double kTieTolerance = 1e-12;

// Weighted graph for the aggregation levels. Row lists include the self-loop
// entry A_ii, which stores twice the internal edge weight of a community.
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> strength;  // row sums of A
  double two_m = 0.0;

  std::size_t size() const { return adj.size(); }
};

WeightedGraph from_graph(const Graph& g) {
  WeightedGraph wg;
  wg.adj.resize(g.num_nodes());
  wg.strength.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    for (auto j : g.neighbors(i)) wg.adj[i].emplace_back(j, 1.0);
    wg.strength[i] = static_cast<double>(g.degree(i));
    wg.two_m += wg.strength[i];
  }
  return wg;
}

double weighted_modularity(const WeightedGraph& wg, const std::vector<std::uint32_t>& comm) {
  std::vector<double> inside(wg.size(), 0.0), tot(wg.size(), 0.0);
  for (std::size_t i = 0; i < wg.size(); ++i) {
    tot[comm[i]] += wg.strength[i];
    for (const auto& [j, w] : wg.adj[i]) {
      if (comm[j] == comm[i]) inside[comm[i]] += w;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < wg.size(); ++c) {
    const double frac = tot[c] / wg.two_m;
    q += inside[c] / wg.two_m - frac * frac;
  }
  return q;
}

// Local moving phase. Returns true if modularity rose by more than kMinGain.
bool move_nodes(const WeightedGraph& wg, std::vector<std::uint32_t>& comm) {
  const std::size_t n = wg.size();
  comm.resize(n);
  std::iota(comm.begin(), comm.end(), 0u);
  std::vector<double> tot = wg.strength;
  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;

  const double q_start = weighted_modularity(wg, comm);
  double q_pass = q_start;
  for (int pass = 0; pass < 1000; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t own = comm[i];
      const double k = wg.strength[i];
      touched.clear();
      for (const auto& [j, w] : wg.adj[i]) {
        if (j == i) continue;
        const auto c = comm[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= k;
      std::sort(touched.begin(), touched.end());
      // gain of inserting i into c, scaled by m: k_i,c - tot_c * k_i / 2m
      std::uint32_t best = own;
      double best_gain = link[own] - tot[own] * k / wg.two_m;
      for (auto c : touched) {
        const double gain = link[c] - tot[c] * k / wg.two_m;
        if (gain > best_gain + kTieTolerance || (std::abs(gain - best_gain) <= kTieTolerance && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += k;
      comm[i] = best;
      for (auto c : touched) link[c] = 0.0;
    }
    const double q_now = weighted_modularity(wg, comm);
    if (q_now - q_pass <= kMinGain) break;
    q_pass = q_now;
  }
  return weighted_modularity(wg, comm) - q_start > kMinGain;
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<std::uint32_t>& comm, std::size_t num_comm) {
  WeightedGraph out;
  out.adj.resize(num_comm);
  out.strength.assign(num_comm, 0.0);
  out.two_m = wg.two_m;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> raw(num_comm);
  for (std::size_t i = 0; i < wg.size(); ++i) {
    out.strength[comm[i]] += wg.strength[i];
    for (const auto& [j, w] : wg.adj[i]) raw[comm[i]].emplace_back(comm[j], w);
  }
  for (std::size_t c = 0; c < num_comm; ++c) {
    auto& row = raw[c];
    std::sort(row.begin(), row.end());
    for (const auto& [d, w] : row) {
      if (!out.adj[c].empty() && out.adj[c].back().first == d) {
        out.adj[c].back().second += w;
      } else {
        out.adj[c].emplace_back(d, w);
      }
    }
  }
  return out;
}

}  // namespace

Tensor AnchorAssignment::dense() const {
  Tensor s(num_communities, num_nodes);
  for (std::size_t j = 0; j < num_nodes; ++j) s(assignment[j], j) = 1.0;
  return s;
}

SparseMatrix AnchorAssignment::mean_pooling() const {
  SparseMatrix m;
  m.rows = num_communities;
  m.cols = num_nodes;
  m.row_offsets.assign(num_communities + 1, 0);
  for (auto c : assignment) ++m.row_offsets[c + 1];
  for (std::size_t c = 0; c < num_communities; ++c) m.row_offsets[c + 1] += m.row_offsets[c];
  m.col_indices.resize(num_nodes);
  m.values.resize(num_nodes);
  std::vector<std::size_t> cursor(m.row_offsets.begin(), m.row_offsets.end() - 1);
  for (std::size_t j = 0; j < num_nodes; ++j) {
    const auto c = assignment[j];
    const auto slot = cursor[c]++;
    m.col_indices[slot] = static_cast<std::uint32_t>(j);
    m.values[slot] = 1.0 / static_cast<double>(community_sizes[c]);
  }
  return m;
}

Partition canonical_partition(const std::vector<std::uint32_t>& assignment) {
  Partition p;
  p.assignment.resize(assignment.size());
  std::vector<std::uint32_t> relabel;
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto c = assignment[i];
    if (c >= relabel.size()) relabel.resize(c + 1, unset);
    if (relabel[c] == unset) relabel[c] = static_cast<std::uint32_t>(p.num_communities++);
    p.assignment[i] = relabel[c];
  }
  return p;
}

Partition louvain(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return {};
  std::vector<std::uint32_t> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), 0u);
  if (g.num_edges() == 0) return canonical_partition(node_comm);

  WeightedGraph level = from_graph(g);
  while (true) {
    std::vector<std::uint32_t> comm;
    const bool improved = move_nodes(level, comm);
    if (!improved) break;
    const Partition compact = canonical_partition(comm);
    for (auto& c : node_comm) c = compact.assignment[c];
    if (compact.num_communities == level.size()) break;
    level = aggregate(level, compact.assignment, compact.num_communities);
  }
  return canonical_partition(node_comm);
}

double modularity(const Graph& g, const Partition& p) {
  if (p.assignment.size() != g.num_nodes()) {
    throw ValidationError("modularity: partition covers " + std::to_string(p.assignment.size()) + " nodes, graph has " +
                          std::to_string(g.num_nodes()));
  }
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) throw ValidationError("modularity is undefined for a graph without edges");
  std::vector<double> intra(p.num_communities, 0.0), degree(p.num_communities, 0.0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto c = p.assignment[i];
    if (c >= p.num_communities) throw ValidationError("modularity: community id out of range");
    degree[c] += static_cast<double>(g.degree(i));
    for (auto j : g.neighbors(i)) {
      if (i < j && p.assignment[j] == c) intra[c] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < p.num_communities; ++c) {
    const double frac = degree[c] / (2.0 * m);
    q += intra[c] / m - frac * frac;
  }
  return q;
}

Partition random_partition(std::size_t n, std::size_t c, std::uint64_t seed) {
  if (c < 1 || c > n) {
    throw ConfigError("random_partition: need 1 <= c <= n, got c = " + std::to_string(c) + ", n = " + std::to_string(n));
  }
  // log_count[r][e]: log of the number of ways to place r more nodes so that
  // the e still-empty groups all end up used (c - e groups already used).
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  auto log_add = [](double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
  };
  std::vector<std::vector<double>> log_count(n + 1, std::vector<double>(c + 1, neg_inf));
  log_count[0][0] = 0.0;
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t e = 0; e <= c; ++e) {
      double v = neg_inf;
      if (c > e && log_count[r - 1][e] != neg_inf) v = std::log(static_cast<double>(c - e)) + log_count[r - 1][e];
      if (e > 0 && log_count[r - 1][e - 1] != neg_inf) {
        v = log_add(v, std::log(static_cast<double>(e)) + log_count[r - 1][e - 1]);
      }
      log_count[r][e] = v;
    }
  }

  Rng rng(seed);
  std::vector<std::uint32_t> empty(c), used;
  std::iota(empty.begin(), empty.end(), 0u);
  used.reserve(c);
  Partition p;
  p.num_communities = c;
  p.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = n - i;
    const std::size_t e = empty.size();
    double p_used = 0.0;
    if (!used.empty() && log_count[r - 1][e] != neg_inf) {
      p_used = std::exp(std::log(static_cast<double>(used.size())) + log_count[r - 1][e] - log_count[r][e]);
    }
    if (empty.empty() || uniform01(rng) < p_used) {
      p.assignment[i] = used[uniform_index(rng, used.size())];
    } else {
      const auto k = uniform_index(rng, empty.size());
      const auto g = empty[k];
      empty[k] = empty.back();
      empty.pop_back();
      used.push_back(g);
      p.assignment[i] = g;
    }
  }
  return p;
}

AnchorAssignment assignment_matrix(const Partition& p) {
  AnchorAssignment a;
  a.num_nodes = p.assignment.size();
  a.num_communities = p.num_communities;
  a.assignment = p.assignment;
  a.community_sizes.assign(p.num_communities, 0);
  for (auto c : p.assignment) {
    if (c >= p.num_communities) throw ValidationError("assignment_matrix: community id out of range");
    ++a.community_sizes[c];
  }
  for (std::size_t c = 0; c < a.num_communities; ++c) {
    if (a.community_sizes[c] == 0) throw ValidationError("assignment_matrix: community " + std::to_string(c) + " is empty");
  }
  return a;
}

}  // namespace agf
