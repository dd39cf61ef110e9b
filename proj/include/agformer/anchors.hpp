#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "agformer/graph.hpp"
#include "agformer/sparse.hpp"
#include "agformer/tensor.hpp"

namespace agf {

// Node -> community id; ids are contiguous in [0, num_communities).
struct Partition {
  std::vector<std::uint32_t> assignment;
  std::size_t num_communities = 0;

  bool operator==(const Partition&) const = default;
};

// Sparse C x N assignment S (one 1 per column) with the community sizes
// that form the diagonal of D.
struct AnchorAssignment {
  std::size_t num_nodes = 0;
  std::size_t num_communities = 0;
  std::vector<std::uint32_t> assignment;
  std::vector<std::size_t> community_sizes;

  Tensor dense() const;
  // D^-1 S as a CSR matrix; multiplying it by H averages each community.
  SparseMatrix mean_pooling() const;
};

// Two-phase Louvain (local moving, then aggregation) at resolution 1.
// Nodes are scanned in ascending id order and gain ties go to the smaller
// community id, so the result is a pure function of the graph. A level ends
// when a full pass raises modularity by no more than 1e-7. Communities are
// numbered by their smallest member.
Partition louvain(const Graph& g);

// Newman modularity Q = sum_c (e_c / m - (d_c / 2m)^2). Throws
// ValidationError for graphs without edges.
double modularity(const Graph& g, const Partition& p);

// Uniformly random assignment of n nodes to c groups conditioned on no group
// being empty (the distribution of resampling until every group is used,
// drawn directly).
Partition random_partition(std::size_t n, std::size_t c, std::uint64_t seed);

AnchorAssignment assignment_matrix(const Partition& p);

// Relabels ids in order of first appearance over ascending node ids.
Partition canonical_partition(const std::vector<std::uint32_t>& assignment);

}  // namespace agf
