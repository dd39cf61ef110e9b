// Independent reference computations used by the tests. Nothing here calls
// into the library's math; everything is dense and written out longhand.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "agformer/tensor.hpp"

namespace oracle {

using agf::Tensor;

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline Tensor transpose(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    long double mx = x(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max<long double>(mx, x(i, j));
    long double s = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) s += std::exp(static_cast<long double>(x(i, j)) - mx);
    for (std::size_t j = 0; j < x.cols(); ++j)
      y(i, j) = static_cast<double>(std::exp(static_cast<long double>(x(i, j)) - mx) / s);
  }
  return y;
}

inline Tensor scale(Tensor a, double c) {
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] *= c;
  return a;
}

// Dense adjacency with self loops, symmetric normalization.
inline Tensor gcn_norm(const Tensor& adj) {
  const std::size_t n = adj.rows();
  std::vector<double> deg(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += adj(i, j);
  Tensor out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adj(i, j) + (i == j ? 1.0 : 0.0);
      out(i, j) = a / std::sqrt(deg[i] * deg[j]);
    }
  return out;
}

// Newman modularity straight from the dense adjacency definition:
// Q = 1/2m * sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j]
inline double modularity(const Tensor& adj, const std::vector<std::uint32_t>& comm) {
  const std::size_t n = adj.rows();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += adj(i, j);
      two_m += adj(i, j);
    }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (comm[i] == comm[j]) q += adj(i, j) - k[i] * k[j] / two_m;
  return q / two_m;
}

// Calls visit(assignment) for every set partition of {0..n-1} in restricted
// growth string form.
inline void for_each_set_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  std::vector<std::uint32_t> a(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t used) {
    if (i == n) {
      visit(a);
      return;
    }
    for (std::uint32_t c = 0; c <= used && c < n; ++c) {
      a[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  if (n == 0) return;
  a[0] = 0;
  rec(1, 1);
}

// Central-difference gradient of f at x (in place perturbation, restored).
inline Tensor numeric_grad(Tensor& x, const std::function<double()>& f, double h = 1e-5) {
  Tensor g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f();
    x[i] = orig - h;
    const double fm = f();
    x[i] = orig;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_error(const Tensor& a, const Tensor& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, rel_error(a[i], b[i], floor));
  return worst;
}

}  // namespace oracle
