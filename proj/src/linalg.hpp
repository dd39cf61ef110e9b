#pragma once

#include "agformer/tensor.hpp"

namespace agf::detail {

// c = alpha * op(a) * op(b) (+ c when accumulate). Dense kernel only; shape
// checks are the caller's job.
void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, double alpha, Tensor& c,
          bool accumulate);

}  // namespace agf::detail
