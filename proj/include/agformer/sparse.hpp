#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "agformer/tensor.hpp"

namespace agf {

// Compressed sparse row matrix used as a constant left operand (normalized
// adjacency, neighbor sum, anchor mean pooling).
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // rows + 1 entries
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  Tensor to_dense() const;
};

// y = A x
Tensor spmm(const SparseMatrix& a, const Tensor& x);
// y = A^T x
Tensor spmm_transposed(const SparseMatrix& a, const Tensor& x);

}  // namespace agf
