#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dicoh/parameters.hpp"
#include "dicoh/tensor.hpp"

namespace dicoh {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient of the last backward() root w.r.t. this value. Zeros when the
  // value did not influence the root.
  const Tensor& grad() const;
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const { return tape_ != nullptr; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode autodiff record. Nodes are appended in evaluation order, so
// parents always precede children and a single reverse sweep visits every
// node exactly once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf whose gradient is kept on the tape (read it through Var::grad()).
  Var variable(Tensor value);
  // Leaf bound to a parameter: backward() adds its gradient into p.grad.
  // The parameter value must not change while this tape is in use.
  Var parameter(Parameter& p);

  // Seeds d(root)/d(root) = 1 for a single-element root and propagates.
  // Allowed once per tape.
  void backward(const Var& root);
  bool backward_done() const { return backward_done_; }
  std::size_t size() const { return nodes_.size(); }

  // Interface for operation authors.
  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn);
  const Tensor& value(std::size_t id) const;
  const Tensor& grad(std::size_t id) const;
  Tensor& grad_accumulator(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  Var var(std::size_t id) { return Var(this, id); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Tensor grad;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
  Tensor empty_;
};

// Elementwise and matrix primitives. Matrix shapes follow Tensor::rows() and
// Tensor::cols(); results are rank-2 unless stated otherwise.
namespace ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
// a (r x c) plus the row vector b (c values) on every row.
Var add_row(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);
// Elementwise product with a constant tensor of the same size.
Var mul_const(const Var& a, const Tensor& k);

Var matmul(const Var& a, const Var& b);     // (r x k)(k x c)
Var matmul_nt(const Var& a, const Var& b);  // (r x k)(c x k)^T

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var relu(const Var& a);

Var sum(const Var& a);   // scalar
Var mean(const Var& a);  // scalar

Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
// out[i] = a[index[i]]; the backward pass scatter-adds.
Var gather_rows(const Var& a, std::vector<std::size_t> index);
// Picks single elements a[r_i, c_i] into an (n x 1) column.
Var pick(const Var& a, std::vector<std::pair<std::size_t, std::size_t>> cells);

Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);

// Softmax over contiguous row segments of an (n x 1) column.
// offsets has one entry per segment plus a final n.
Var segment_softmax(const Var& scores, std::vector<std::size_t> offsets);
// Row s of the result is sum over rows t in segment s of weights[t] * x[t].
Var segment_weighted_sum(const Var& weights, const Var& x, std::vector<std::size_t> offsets);

}  // namespace ops
}  // namespace dicoh
