#include "agformer/sparse.hpp"

#include "agformer/errors.hpp"

namespace agf {

Tensor SparseMatrix::to_dense() const {
  Tensor d(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) d(r, col_indices[k]) += values[k];
  }
  return d;
}

Tensor spmm(const SparseMatrix& a, const Tensor& x) {
  if (a.cols != x.rows()) {
    throw ShapeError("spmm: sparse [" + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     "] times " + x.shape().str());
  }
  const std::size_t n = x.cols();
  Tensor y(a.rows, n);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* out = &y(r, 0);
    for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      const double w = a.values[k];
      const double* in = x.row_span(a.col_indices[k]).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += w * in[j];
    }
  }
  return y;
}

Tensor spmm_transposed(const SparseMatrix& a, const Tensor& x) {
  if (a.rows != x.rows()) {
    throw ShapeError("spmm_transposed: sparse [" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + "]^T times " + x.shape().str());
  }
  const std::size_t n = x.cols();
  Tensor y(a.cols, n);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* in = x.row_span(r).data();
    for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      const double w = a.values[k];
      double* out = &y(a.col_indices[k], 0);
      for (std::size_t j = 0; j < n; ++j) out[j] += w * in[j];
    }
  }
  return y;
}

}  // namespace agf
