#include "linalg.hpp"

#include <Eigen/Core>

namespace agf::detail {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Tensor& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

}  // namespace

void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, double alpha, Tensor& c,
          bool accumulate) {
  MutMap out(c.data().data(), static_cast<Eigen::Index>(c.rows()), static_cast<Eigen::Index>(c.cols()));
  const ConstMap ma = view(a);
  const ConstMap mb = view(b);
  if (!accumulate) out.setZero();
  if (!trans_a && !trans_b) {
    out.noalias() += alpha * ma * mb;
  } else if (!trans_a && trans_b) {
    out.noalias() += alpha * ma * mb.transpose();
  } else if (trans_a && !trans_b) {
    out.noalias() += alpha * ma.transpose() * mb;
  } else {
    out.noalias() += alpha * ma.transpose() * mb.transpose();
  }
}

}  // namespace agf::detail
