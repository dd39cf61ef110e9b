#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "agformer/rng.hpp"
#include "agformer/sparse.hpp"
#include "agformer/tensor.hpp"

namespace agf {

// A learnable leaf. Backward passes accumulate into `grad` until the caller
// clears it, which is how mini-batch gradient accumulation works.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v);
  void zero_grad();
};

namespace ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run tape. Nodes are appended in evaluation order, so the node
// vector is already topologically sorted and backward is a single reverse
// sweep. One tape per forward pass; never shared across threads.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf whose gradient is kept on the tape (read it back with grad()).
  Var input(Tensor value);
  // Leaf bound to a parameter. The parameter must outlive the tape.
  Var param(Parameter& p);

  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool owns(const Var& v) const { return v.tape() == this && v.id() < nodes_.size(); }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse creation order.
  // Parameter leaves receive their gradient in Parameter::grad.
  void backward(const Var& loss);

  // Gradient of an input() leaf or intermediate after backward(); zeros if
  // the node received no gradient.
  Tensor grad(const Var& v) const;

  // Adds g into the pending gradient of node `id` (no-op for constants).
  void accumulate(std::size_t id, const Tensor& g);
  void accumulate(std::size_t id, Tensor&& g);
  // Gradient buffer of a parameter leaf, or nullptr for any other node.
  Tensor* param_grad(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// -- Primitives ------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
// alpha * a * b^T, used for attention scores.
Var matmul_nt(const Var& a, const Var& b, double alpha = 1.0);
// Constant sparse left operand; `m` must outlive the tape.
Var spmm(const SparseMatrix& m, const Var& x);

Var add(const Var& a, const Var& b);
Var scale(const Var& a, double c);
// s is a 1x1 node; returns s * a.
Var mul_scalar(const Var& s, const Var& a);
Var relu(const Var& a);
// Adds a 1 x n row to every row of an m x n matrix.
Var bias_add(const Var& a, const Var& bias);

Var softmax_rows(const Var& x);
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// Inverted dropout. In eval mode (or rate 0) the input is returned as is.
Var dropout(const Var& x, double rate, Rng& rng, bool training);

Var sum(const Var& x);
// Column-wise mean over rows: m x n -> 1 x n.
Var mean_rows(const Var& x);
// Numerically stable -log softmax(logits)[label] for a 1 x K row.
Var cross_entropy(const Var& logits, std::size_t label);

}  // namespace ad
}  // namespace agf
