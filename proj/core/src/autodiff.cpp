#include "dicoh/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_mat(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap as_mat(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

Tensor new_matrix(std::size_t r, std::size_t c) { return Tensor({r, c}); }

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": operand shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

Tape& tape_of(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw PreconditionError("operands recorded on different tapes");
  return a.tape();
}

}  // namespace

// ---------------------------------------------------------------- Var / Tape

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = p.trainable;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn) {
  if (backward_done_) throw PreconditionError("cannot record on a tape after backward()");
  Node n;
  n.value = std::move(value);
  for (std::size_t p : parents) {
    if (p >= nodes_.size()) throw PreconditionError("parent index beyond the tape");
    n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  }
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty() && !value(id).empty()) {
    // Untouched node: report zeros of the right shape.
    auto& self = const_cast<Node&>(n);
    self.grad = Tensor(value(id).shape());
  }
  return n.grad;
}

Tensor& Tape::grad_accumulator(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

void Tape::backward(const Var& root) {
  if (backward_done_) throw PreconditionError("backward() already ran on this tape; record a new one");
  if (&root.tape() != this) throw PreconditionError("backward root belongs to another tape");
  if (value(root.id()).size() != 1) {
    throw DimensionError("backward root must hold a single value, got shape " +
                         shape_string(value(root.id()).shape()));
  }
  backward_done_ = true;
  if (!nodes_[root.id()].requires_grad) return;
  grad_accumulator(root.id())[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      Parameter& p = *n.param;
      if (!p.grad.same_shape(p.value)) p.zero_grad();
      const Tensor& g = nodes_[i].grad;
      for (std::size_t k = 0; k < g.size(); ++k) p.grad[k] += g[k];
    }
  }
}

// ------------------------------------------------------------------- ops

namespace ops {

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "add");
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    for (std::size_t p : {ia, ib}) {
      if (!tp.requires_grad(p)) continue;
      Tensor& ga = tp.grad_accumulator(p);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "sub");
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_accumulator(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "mul");
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& va = tp.value(ia);
    const Tensor& vb = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_accumulator(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var div(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same(a.value(), b.value(), "div");
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] / b.value()[i];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& va = tp.value(ia);
    const Tensor& vb = tp.value(ib);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / vb[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_accumulator(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * va[i] / (vb[i] * vb[i]);
    }
  });
}

Var add_row(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const std::size_t r = a.rows(), c = a.cols();
  if (b.value().size() != c) {
    throw DimensionError("add_row: row vector of shape " + shape_string(b.value().shape()) +
                         " does not match " + std::to_string(c) + " columns");
  }
  Tensor out = new_matrix(r, c);
  const double* va = a.value().data();
  const double* vb = b.value().data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = va[i * c + j] + vb[j];
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, r, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad_accumulator(ib);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
    }
  });
}

Var scale(const Var& a, double k) {
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * k;
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, k](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k;
  });
}

Var add_scalar(const Var& a, double k) {
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + k;
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var mul_const(const Var& a, const Tensor& k) {
  if (k.size() != a.value().size()) {
    throw DimensionError("mul_const: constant of shape " + shape_string(k.shape()) +
                         " does not match operand " + shape_string(a.value().shape()));
  }
  Tensor out = new_matrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * k[i];
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, k](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k[i];
  });
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a.value().shape()) + " x " +
                         shape_string(b.value().shape()));
  }
  Tensor out = new_matrix(a.rows(), b.cols());
  as_mat(out).noalias() = as_mat(a.value()) * as_mat(b.value());
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    auto g = as_mat(tp.grad(self));
    if (tp.requires_grad(ia)) as_mat(tp.grad_accumulator(ia)).noalias() += g * as_mat(tp.value(ib)).transpose();
    if (tp.requires_grad(ib)) as_mat(tp.grad_accumulator(ib)).noalias() += as_mat(tp.value(ia)).transpose() * g;
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: " + shape_string(a.value().shape()) + " x " +
                         shape_string(b.value().shape()) + "^T");
  }
  Tensor out = new_matrix(a.rows(), b.rows());
  as_mat(out).noalias() = as_mat(a.value()) * as_mat(b.value()).transpose();
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    auto g = as_mat(tp.grad(self));
    if (tp.requires_grad(ia)) as_mat(tp.grad_accumulator(ia)).noalias() += g * as_mat(tp.value(ib));
    if (tp.requires_grad(ib)) as_mat(tp.grad_accumulator(ib)).noalias() += g.transpose() * as_mat(tp.value(ia));
  });
}

namespace {

// Unary op whose derivative is expressible from (input, output).
template <typename Fwd, typename Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv) {
  Tensor out = new_matrix(a.rows(), a.cols());
  const Tensor& va = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(va[i]);
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, deriv](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(ia);
    const Tensor& y = tp.value(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var sigmoid(const Var& a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x < 0 ? 0.0 : x; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var sum(const Var& a) {
  double s = 0;
  for (double v : a.value().values()) s += v;
  std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s), {ia}, [ia](Tape& tp, std::size_t self) {
    double g = tp.grad(self)[0];
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw PreconditionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  const std::size_t r = a.rows(), c = a.cols();
  if (begin > end || end > r) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                         std::to_string(r) + " rows");
  }
  Tensor out = new_matrix(end - begin, c);
  std::copy(a.value().data() + begin * c, a.value().data() + end * c, out.data());
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, begin, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    double* dst = ga.data() + begin * c;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  const std::size_t r = a.rows(), c = a.cols();
  if (begin > end || end > c) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                         std::to_string(c) + " columns");
  }
  const std::size_t w = end - begin;
  Tensor out = new_matrix(r, w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy(a.value().data() + i * c + begin, a.value().data() + i * c + end, out.data() + i * w);
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, begin, r, c, w](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) ga[i * c + begin + j] += g[i * w + j];
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat_rows of nothing");
  Tape& t = parts[0].tape();
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    if (p.cols() != c) throw DimensionError("concat_rows: column counts differ");
    if (&p.tape() != &t) throw PreconditionError("operands recorded on different tapes");
    r += p.rows();
    ids.push_back(p.id());
  }
  Tensor out = new_matrix(r, c);
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off);
    off += p.value().size();
  }
  auto parents = ids;
  return t.record(std::move(out), std::move(parents), [ids](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      const std::size_t n = tp.value(id).size();
      if (tp.requires_grad(id)) {
        Tensor& gp = tp.grad_accumulator(id);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
      }
      off += n;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw PreconditionError("concat_cols of nothing");
  Tape& t = parts[0].tape();
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    if (p.rows() != r) throw DimensionError("concat_cols: row counts differ");
    if (&p.tape() != &t) throw PreconditionError("operands recorded on different tapes");
    c += p.cols();
    ids.push_back(p.id());
  }
  Tensor out = new_matrix(r, c);
  std::size_t col = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy(p.value().data() + i * w, p.value().data() + (i + 1) * w, out.data() + i * c + col);
    col += w;
  }
  auto parents = ids;
  return t.record(std::move(out), std::move(parents), [ids, r, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t col = 0;
    for (std::size_t id : ids) {
      const std::size_t w = tp.value(id).cols();
      if (tp.requires_grad(id)) {
        Tensor& gp = tp.grad_accumulator(id);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < w; ++j) gp[i * w + j] += g[i * c + col + j];
      }
      col += w;
    }
  });
}

Var gather_rows(const Var& a, std::vector<std::size_t> index) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = new_matrix(index.size(), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= r) {
      throw DimensionError("gather_rows: index " + std::to_string(index[i]) + " beyond " + std::to_string(r) +
                           " rows");
    }
    std::copy(a.value().data() + index[i] * c, a.value().data() + (index[i] + 1) * c, out.data() + i * c);
  }
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, c, index = std::move(index)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < index.size(); ++i) {
      double* dst = ga.data() + index[i] * c;
      const double* src = g.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var pick(const Var& a, std::vector<std::pair<std::size_t, std::size_t>> cells) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = new_matrix(cells.size(), 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto [row, col] = cells[i];
    if (row >= r || col >= c) {
      throw DimensionError("pick: cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                           shape_string(a.value().shape()));
    }
    out[i] = a.value()[row * c + col];
  }
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, c, cells = std::move(cells)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < cells.size(); ++i) ga[cells[i].first * c + cells[i].second] += g[i];
  });
}

Var softmax_rows(const Var& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = new_matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.value().data() + i * c;
    double* y = out.data() + i * c;
    double m = *std::max_element(x, x + c);
    double z = 0;
    for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - m));
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, r, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
    }
  });
}

Var log_softmax_rows(const Var& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = new_matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.value().data() + i * c;
    double* y = out.data() + i * c;
    double m = *std::max_element(x, x + c);
    double z = 0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - m);
    double lz = m + std::log(z);
    for (std::size_t j = 0; j < c; ++j) y[j] = x[j] - lz;
  }
  std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, r, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < r; ++i) {
      double gs = 0;
      for (std::size_t j = 0; j < c; ++j) gs += g[i * c + j];
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i * c + j] - std::exp(y[i * c + j]) * gs;
    }
  });
}

namespace {

void check_offsets(const std::vector<std::size_t>& offsets, std::size_t n, const char* op) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != n) {
    throw DimensionError(std::string(op) + ": offsets must start at 0 and end at the row count");
  }
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s] >= offsets[s + 1]) {
      throw PreconditionError(std::string(op) + ": segment " + std::to_string(s) + " is empty");
    }
  }
}

}  // namespace

Var segment_softmax(const Var& scores, std::vector<std::size_t> offsets) {
  if (scores.cols() != 1) throw DimensionError("segment_softmax expects an (n x 1) column");
  const std::size_t n = scores.rows();
  check_offsets(offsets, n, "segment_softmax");
  Tensor out = new_matrix(n, 1);
  const double* x = scores.value().data();
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t b = offsets[s], e = offsets[s + 1];
    double m = *std::max_element(x + b, x + e);
    double z = 0;
    for (std::size_t t = b; t < e; ++t) z += (out[t] = std::exp(x[t] - m));
    for (std::size_t t = b; t < e; ++t) out[t] /= z;
  }
  std::size_t ia = scores.id();
  return scores.tape().record(std::move(out), {ia}, [ia, offsets = std::move(offsets)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& ga = tp.grad_accumulator(ia);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      double dot = 0;
      for (std::size_t t = offsets[s]; t < offsets[s + 1]; ++t) dot += g[t] * y[t];
      for (std::size_t t = offsets[s]; t < offsets[s + 1]; ++t) ga[t] += y[t] * (g[t] - dot);
    }
  });
}

Var segment_weighted_sum(const Var& weights, const Var& x, std::vector<std::size_t> offsets) {
  Tape& t = tape_of(weights, x);
  if (weights.cols() != 1 || weights.rows() != x.rows()) {
    throw DimensionError("segment_weighted_sum: weights " + shape_string(weights.value().shape()) +
                         " do not match rows of " + shape_string(x.value().shape()));
  }
  const std::size_t n = x.rows(), c = x.cols();
  check_offsets(offsets, n, "segment_weighted_sum");
  const std::size_t segs = offsets.size() - 1;
  Tensor out = new_matrix(segs, c);
  const double* w = weights.value().data();
  const double* xv = x.value().data();
  for (std::size_t s = 0; s < segs; ++s)
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
      for (std::size_t j = 0; j < c; ++j) out[s * c + j] += w[r] * xv[r * c + j];
  std::size_t iw = weights.id(), ix = x.id();
  return t.record(std::move(out), {iw, ix},
                  [iw, ix, c, offsets = std::move(offsets)](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    const Tensor& w = tp.value(iw);
                    const Tensor& xv = tp.value(ix);
                    const bool need_w = tp.requires_grad(iw), need_x = tp.requires_grad(ix);
                    Tensor* gw = need_w ? &tp.grad_accumulator(iw) : nullptr;
                    Tensor* gx = need_x ? &tp.grad_accumulator(ix) : nullptr;
                    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
                      for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
                        double acc = 0;
                        for (std::size_t j = 0; j < c; ++j) {
                          acc += g[s * c + j] * xv[r * c + j];
                          if (gx) (*gx)[r * c + j] += g[s * c + j] * w[r];
                        }
                        if (gw) (*gw)[r] += acc;
                      }
                    }
                  });
}

}  // namespace ops
}  // namespace dicoh
