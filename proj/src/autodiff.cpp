#include "agformer/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "agformer/errors.hpp"
#include "linalg.hpp"

namespace agf {

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
  grad = Tensor(value.rows(), value.cols());
}

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) grad = Tensor(value.rows(), value.cols());
  grad.fill(0.0);
}

namespace ad {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ValidationError("Var is not attached to a tape");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, false, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, true, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  nodes_.push_back(Node{Tensor{}, &p, true, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  bool needs_grad = false;
  for (const Var& in : inputs) {
    if (!owns(in)) throw ValidationError("operation input belongs to a different tape");
    needs_grad = needs_grad || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), nullptr, needs_grad, needs_grad ? std::move(backward) : BackwardFn{}});
  return {this, nodes_.size() - 1};
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.param != nullptr ? n.param->value : n.value;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& slot = grads_[id];
  if (slot.numel() == 0 && slot.rows() == 0) {
    slot = g;
    return;
  }
  for (std::size_t i = 0; i < g.numel(); ++i) slot[i] += g[i];
}

void Tape::accumulate(std::size_t id, Tensor&& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& slot = grads_[id];
  if (slot.numel() == 0 && slot.rows() == 0) {
    slot = std::move(g);
    return;
  }
  for (std::size_t i = 0; i < g.numel(); ++i) slot[i] += g[i];
}

Tensor* Tape::param_grad(std::size_t id) {
  Parameter* p = nodes_[id].param;
  if (p == nullptr) return nullptr;
  if (p->grad.shape() != p->value.shape()) p->zero_grad();
  return &p->grad;
}

void Tape::backward(const Var& loss) {
  if (!owns(loss)) throw ValidationError("backward: loss node is not on this tape");
  if (loss.shape() != Shape{1, 1}) throw ShapeError("backward: loss must be scalar, got " + loss.shape().str());
  grads_.assign(nodes_.size(), Tensor{});
  if (!nodes_[loss.id()].requires_grad) return;
  grads_[loss.id()] = Tensor::ones(1, 1);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || grads_[id].rows() == 0) continue;
    if (node.param != nullptr) {
      Parameter& p = *node.param;
      if (p.grad.shape() != p.value.shape()) p.zero_grad();
      const Tensor& g = grads_[id];
      for (std::size_t i = 0; i < g.numel(); ++i) p.grad[i] += g[i];
    } else if (node.backward) {
      node.backward(*this, grads_[id]);
    }
  }
}

Tensor Tape::grad(const Var& v) const {
  if (!owns(v)) throw ValidationError("grad: node is not on this tape");
  if (v.id() < grads_.size() && grads_[v.id()].rows() != 0) return grads_[v.id()];
  return Tensor(v.shape().rows, v.shape().cols);
}

namespace {

Tape& same_tape(const Var& a, const Var& b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) throw ValidationError("operands live on different tapes");
  return *a.tape();
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + av.shape().str() + " x " + bv.shape().str());
  }
  Tensor out(av.rows(), bv.cols());
  detail::gemm(av, false, bv, false, 1.0, out, false);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, const Tensor& g) {
    const Tensor& A = tp.value(ia);
    const Tensor& B = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor da(A.rows(), A.cols());
      detail::gemm(g, false, B, true, 1.0, da, false);
      tp.accumulate(ia, std::move(da));
    }
    if (tp.requires_grad(ib)) {
      if (Tensor* pg = tp.param_grad(ib)) {
        detail::gemm(A, true, g, false, 1.0, *pg, true);
      } else {
        Tensor db(B.rows(), B.cols());
        detail::gemm(A, true, g, false, 1.0, db, false);
        tp.accumulate(ib, std::move(db));
      }
    }
  });
}

Var matmul_nt(const Var& a, const Var& b, double alpha) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt: inner dimensions differ, " + av.shape().str() + " x " + bv.shape().str() + "^T");
  }
  Tensor out(av.rows(), bv.rows());
  detail::gemm(av, false, bv, true, alpha, out, false);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib, alpha](Tape& tp, const Tensor& g) {
    const Tensor& A = tp.value(ia);
    const Tensor& B = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor da(A.rows(), A.cols());
      detail::gemm(g, false, B, false, alpha, da, false);
      tp.accumulate(ia, std::move(da));
    }
    if (tp.requires_grad(ib)) {
      if (Tensor* pg = tp.param_grad(ib)) {
        detail::gemm(g, true, A, false, alpha, *pg, true);
      } else {
        Tensor db(B.rows(), B.cols());
        detail::gemm(g, true, A, false, alpha, db, false);
        tp.accumulate(ib, std::move(db));
      }
    }
  });
}

Var spmm(const SparseMatrix& m, const Var& x) {
  Tape& t = *x.tape();
  Tensor out = agf::spmm(m, x.value());
  const std::size_t ix = x.id();
  const SparseMatrix* pm = &m;
  return t.record(std::move(out), {x}, [ix, pm](Tape& tp, const Tensor& g) {
    tp.accumulate(ix, spmm_transposed(*pm, g));
  });
}

Var add(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var scale(const Var& a, double c) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, c](Tape& tp, const Tensor& g) {
    Tensor d = g;
    for (std::size_t i = 0; i < d.numel(); ++i) d[i] *= c;
    tp.accumulate(ia, std::move(d));
  });
}

Var mul_scalar(const Var& s, const Var& a) {
  Tape& t = same_tape(s, a);
  if (s.shape() != Shape{1, 1}) throw ShapeError("mul_scalar: scale must be 1x1, got " + s.shape().str());
  const double sv = s.value()[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= sv;
  const std::size_t is = s.id(), ia = a.id();
  return t.record(std::move(out), {s, a}, [is, ia](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(ia);
    const double sval = tp.value(is)[0];
    if (tp.requires_grad(is)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.numel(); ++i) acc += g[i] * av[i];
      tp.accumulate(is, Tensor({1, 1}, {acc}));
    }
    if (tp.requires_grad(ia)) {
      Tensor d = g;
      for (std::size_t i = 0; i < d.numel(); ++i) d[i] *= sval;
      tp.accumulate(ia, std::move(d));
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(ia);
    Tensor d = g;
    for (std::size_t i = 0; i < d.numel(); ++i) {
      if (!(x[i] > 0.0)) d[i] = 0.0;
    }
    tp.accumulate(ia, std::move(d));
  });
}

Var bias_add(const Var& a, const Var& bias) {
  Tape& t = same_tape(a, bias);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError("bias_add: bias " + bv.shape().str() + " does not broadcast over " + av.shape().str());
  }
  Tensor out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
  }
  const std::size_t ia = a.id(), ib = bias.id();
  return t.record(std::move(out), {a, bias}, [ia, ib](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ib)) {
      Tensor db(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) db[c] += g(r, c);
      }
      tp.accumulate(ib, std::move(db));
    }
  });
}

Var softmax_rows(const Var& x) {
  Tape& t = *x.tape();
  const Tensor& xv = x.value();
  if (xv.cols() == 0) throw ShapeError("softmax_rows: empty rows " + xv.shape().str());
  if (!xv.all_finite()) throw NumericError("softmax_rows: non-finite input");
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const auto in = xv.row_span(r);
    auto o = out.row_span(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      z += o[c];
    }
    const double inv = 1.0 / z;
    for (double& v : o) v *= inv;
  }
  const std::size_t ix = x.id();
  const std::size_t iy = t.size();  // id the output is about to receive
  return t.record(std::move(out), {x}, [ix, iy](Tape& tp, const Tensor& g) {
    const Tensor& y = tp.value(iy);
    Tensor d(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) = y(r, c) * (g(r, c) - dot);
    }
    tp.accumulate(ix, std::move(d));
  });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps) {
  Tape& t = same_tape(x, gamma);
  same_tape(x, beta);
  const Tensor& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (n == 0) throw ShapeError("layer_norm_rows: rows have no columns " + xv.shape().str());
  if (gamma.shape() != Shape{1, n} || beta.shape() != Shape{1, n}) {
    throw ShapeError("layer_norm_rows: gamma " + gamma.shape().str() + " / beta " + beta.shape().str() +
                     " do not match row width " + std::to_string(n));
  }
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  // normalized rows and per-row 1/sigma are kept for the backward rule
  auto xhat = std::make_shared<Tensor>(m, n);
  auto inv_std = std::make_shared<std::vector<double>>(m);
  Tensor out(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    const auto in = xv.row_span(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t c = 0; c < n; ++c) {
      const double h = (in[c] - mean) * inv;
      (*xhat)(r, c) = h;
      out(r, c) = gv[c] * h + bv[c];
    }
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.record(std::move(out), {x, gamma, beta}, [ix, ig, ib, xhat, inv_std](Tape& tp, const Tensor& g) {
    const Tensor& gv2 = tp.value(ig);
    const std::size_t rows = g.rows(), cols = g.cols();
    if (tp.requires_grad(ig) || tp.requires_grad(ib)) {
      Tensor dgamma(1, cols), dbeta(1, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          dgamma[c] += g(r, c) * (*xhat)(r, c);
          dbeta[c] += g(r, c);
        }
      }
      tp.accumulate(ig, std::move(dgamma));
      tp.accumulate(ib, std::move(dbeta));
    }
    if (tp.requires_grad(ix)) {
      Tensor dx(rows, cols);
      const double nn = static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          const double dh = g(r, c) * gv2[c];
          sum_dh += dh;
          sum_dh_h += dh * (*xhat)(r, c);
        }
        const double k = (*inv_std)[r] / nn;
        for (std::size_t c = 0; c < cols; ++c) {
          const double dh = g(r, c) * gv2[c];
          dx(r, c) = k * (nn * dh - sum_dh - (*xhat)(r, c) * sum_dh_h);
        }
      }
      tp.accumulate(ix, std::move(dx));
    }
  });
}

Var dropout(const Var& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  const Tensor& xv = x.value();
  auto mask = std::make_shared<std::vector<double>>(xv.numel());
  Tensor out = xv;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double m = uniform01(rng) < rate ? 0.0 : keep_scale;
    (*mask)[i] = m;
    out[i] *= m;
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, mask](Tape& tp, const Tensor& g) {
    Tensor d = g;
    for (std::size_t i = 0; i < d.numel(); ++i) d[i] *= (*mask)[i];
    tp.accumulate(ix, std::move(d));
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  const Shape shape = x.shape();
  return x.tape()->record(Tensor({1, 1}, {s}), {x}, [ix, shape](Tape& tp, const Tensor& g) {
    tp.accumulate(ix, Tensor(shape.rows, shape.cols, g[0]));
  });
}

Var mean_rows(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rows() == 0) throw ShapeError("mean_rows: no rows to average");
  Tensor out(1, xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < xv.cols(); ++c) out[c] += xv(r, c);
  }
  const double inv = 1.0 / static_cast<double>(xv.rows());
  for (std::size_t c = 0; c < out.numel(); ++c) out[c] *= inv;
  const std::size_t ix = x.id();
  const std::size_t rows = xv.rows();
  return x.tape()->record(std::move(out), {x}, [ix, rows, inv](Tape& tp, const Tensor& g) {
    Tensor d(rows, g.cols());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) d(r, c) = g[c] * inv;
    }
    tp.accumulate(ix, std::move(d));
  });
}

Var cross_entropy(const Var& logits, std::size_t label) {
  const Tensor& z = logits.value();
  if (z.rows() != 1 || z.cols() == 0) throw ShapeError("cross_entropy: logits must be 1xK, got " + z.shape().str());
  if (label >= z.cols()) {
    throw ValidationError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                          std::to_string(z.cols()) + " classes");
  }
  if (!z.all_finite()) throw NumericError("cross_entropy: non-finite logits");
  const double mx = *std::max_element(z.data().begin(), z.data().end());
  double s = 0.0;
  for (double v : z.data()) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  const std::size_t iz = logits.id();
  return logits.tape()->record(Tensor({1, 1}, {lse - z[label]}), {logits},
                               [iz, label, lse](Tape& tp, const Tensor& g) {
                                 const Tensor& zz = tp.value(iz);
                                 Tensor d(1, zz.cols());
                                 for (std::size_t c = 0; c < zz.cols(); ++c) {
                                   d[c] = g[0] * (std::exp(zz[c] - lse) - (c == label ? 1.0 : 0.0));
                                 }
                                 tp.accumulate(iz, std::move(d));
                               });
}

}  // namespace ad
}  // namespace agf
