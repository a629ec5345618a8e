#include "dicoh/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

Tensor uniform_tensor(Shape shape, double bound, SeededRng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

void expect_shape(const Tensor& t, std::size_t rows, std::size_t cols, const std::string& what) {
  if (t.rows() != rows || t.cols() != cols) {
    throw DimensionError(what + " has shape " + shape_string(t.shape()) + ", expected [" + std::to_string(rows) +
                         "," + std::to_string(cols) + "]");
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

struct GateActivations {
  double i, f, g, o;
};

GateActivations activate(const Tensor& z, std::size_t r, std::size_t H, std::size_t j) {
  const double* row = z.data() + r * 4 * H;
  return {sigmoid(row[j]), sigmoid(row[H + j]), std::tanh(row[2 * H + j]), sigmoid(row[3 * H + j])};
}

// Cell nonlinearity on gate pre-activations z (k x 4H, order i f g o) and
// c_prev (k x H). Value is [h | c] (k x 2H).
Var lstm_cell(const Var& z, const Var& c_prev, std::size_t H) {
  const Tensor& vz = z.value();
  const Tensor& vc = c_prev.value();
  const std::size_t k = vz.rows();
  Tensor out({k, 2 * H});
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t j = 0; j < H; ++j) {
      GateActivations a = activate(vz, r, H, j);
      double c = a.f * vc[r * H + j] + a.i * a.g;
      out[r * 2 * H + j] = a.o * std::tanh(c);
      out[r * 2 * H + H + j] = c;
    }
  }
  std::size_t iz = z.id(), ic = c_prev.id();
  return z.tape().record(std::move(out), {iz, ic}, [iz, ic, H](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& vz = tp.value(iz);
    const Tensor& vcp = tp.value(ic);
    const Tensor& y = tp.value(self);
    const std::size_t k = vz.rows();
    const bool want_z = tp.requires_grad(iz), want_c = tp.requires_grad(ic);
    Tensor* gz = want_z ? &tp.grad_accumulator(iz) : nullptr;
    Tensor* gc = want_c ? &tp.grad_accumulator(ic) : nullptr;
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t j = 0; j < H; ++j) {
        GateActivations a = activate(vz, r, H, j);
        const double tc = std::tanh(y[r * 2 * H + H + j]);
        const double gh = g[r * 2 * H + j];
        const double dc = g[r * 2 * H + H + j] + gh * a.o * (1.0 - tc * tc);
        const double cp = vcp[r * H + j];
        if (gz) {
          double* row = gz->data() + r * 4 * H;
          row[j] += dc * a.g * a.i * (1.0 - a.i);
          row[H + j] += dc * cp * a.f * (1.0 - a.f);
          row[2 * H + j] += dc * a.i * (1.0 - a.g * a.g);
          row[3 * H + j] += gh * tc * a.o * (1.0 - a.o);
        }
        if (gc) (*gc)[r * H + j] += dc * a.f;
      }
    }
  });
}

}  // namespace

LstmCellParams LstmCellParams::create(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                                      std::size_t hidden_size, SeededRng& init) {
  if (input_size == 0 || hidden_size == 0) throw ConfigError(prefix + ": LSTM sizes must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  const std::size_t g = 4 * hidden_size;
  LstmCellParams p;
  p.w_input = &store.add(prefix + ".w_input", uniform_tensor({g, input_size}, bound, init));
  p.w_hidden = &store.add(prefix + ".w_hidden", uniform_tensor({g, hidden_size}, bound, init));
  p.b_input = &store.add(prefix + ".b_input", uniform_tensor({g}, bound, init));
  p.b_hidden = &store.add(prefix + ".b_hidden", uniform_tensor({g}, bound, init));
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.validate();
  return p;
}

LstmCellParams LstmCellParams::lookup(ParameterStore& store, const std::string& prefix) {
  LstmCellParams p;
  p.w_input = &store.get(prefix + ".w_input");
  p.w_hidden = &store.get(prefix + ".w_hidden");
  p.b_input = &store.get(prefix + ".b_input");
  p.b_hidden = &store.get(prefix + ".b_hidden");
  p.hidden_size = p.w_hidden->value.cols();
  p.input_size = p.w_input->value.cols();
  p.validate();
  return p;
}

void LstmCellParams::validate() const {
  if (!w_input || !w_hidden || !b_input || !b_hidden) throw PreconditionError("LSTM parameters not bound");
  const std::size_t g = 4 * hidden_size;
  expect_shape(w_input->value, g, input_size, w_input->name);
  expect_shape(w_hidden->value, g, hidden_size, w_hidden->name);
  expect_shape(b_input->value, 1, g, b_input->name);
  expect_shape(b_hidden->value, 1, g, b_hidden->name);
}

std::size_t LstmCellParams::scalar_count() const {
  return 4 * hidden_size * (input_size + hidden_size + 2);
}

LstmCellVars bind(Tape& tape, const LstmCellParams& params) {
  params.validate();
  return LstmCellVars{tape.parameter(*params.w_input), tape.parameter(*params.w_hidden),
                      tape.parameter(*params.b_input), tape.parameter(*params.b_hidden), params.hidden_size,
                      params.input_size};
}

Var project_inputs(const LstmCellVars& cell, const Var& inputs) {
  expect_shape(inputs.value(), inputs.rows(), cell.input_size, "LSTM input");
  return ops::add_row(ops::matmul_nt(inputs, cell.w_input), cell.b_input);
}

LstmState lstm_step_projected(const LstmCellVars& cell, const Var& gates_in, const Var& h_prev, const Var& c_prev) {
  const std::size_t H = cell.hidden_size;
  const std::size_t k = gates_in.rows();
  expect_shape(gates_in.value(), k, 4 * H, "gate pre-activations");
  expect_shape(h_prev.value(), k, H, "h_prev");
  expect_shape(c_prev.value(), k, H, "c_prev");

  Var gates = ops::add_row(ops::add(gates_in, ops::matmul_nt(h_prev, cell.w_hidden)), cell.b_hidden);
  Var hc = lstm_cell(gates, c_prev, H);
  return {ops::slice_cols(hc, 0, H), ops::slice_cols(hc, H, 2 * H)};
}

LstmState lstm_step(const LstmCellVars& cell, const Var& input, const Var& h_prev, const Var& c_prev) {
  if (input.cols() != cell.input_size) {
    throw DimensionError("e_t has " + std::to_string(input.cols()) + " features, LSTM expects " +
                         std::to_string(cell.input_size));
  }
  return lstm_step_projected(cell, project_inputs(cell, input), h_prev, c_prev);
}

PackedLayout::PackedLayout(std::vector<std::size_t> lengths) : lengths_(std::move(lengths)) {
  if (lengths_.empty()) throw PreconditionError("packed layout with no sequences");
  offsets_.assign(lengths_.size() + 1, 0);
  for (std::size_t s = 0; s < lengths_.size(); ++s) {
    if (lengths_[s] == 0) throw PreconditionError("sequence " + std::to_string(s) + " is empty");
    offsets_[s + 1] = offsets_[s] + lengths_[s];
    max_length_ = std::max(max_length_, lengths_[s]);
  }
  order_.resize(lengths_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return lengths_[a] > lengths_[b]; });
}

Var lstm_packed(const LstmCellVars& cell, const Var& gates_in, const PackedLayout& layout, bool reverse) {
  const std::size_t H = cell.hidden_size;
  expect_shape(gates_in.value(), layout.total(), 4 * H, "packed gate pre-activations");
  Tape& tape = gates_in.tape();
  const auto& order = layout.by_length();
  const auto& offsets = layout.offsets();
  const std::size_t S = layout.sequences();

  // Sequences sorted by length means the active rows at step t are always a
  // prefix, and a finished sequence never becomes active again.
  Var h = tape.constant(Tensor({S, H}));
  Var c = tape.constant(Tensor({S, H}));
  std::vector<Var> outputs;
  outputs.reserve(layout.max_length());
  std::vector<std::size_t> packed_index(layout.total());
  std::size_t base = 0;
  for (std::size_t t = 0; t < layout.max_length(); ++t) {
    std::size_t k = 0;
    while (k < S && layout.length(order[k]) > t) ++k;
    std::vector<std::size_t> rows(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t s = order[j];
      const std::size_t pos = reverse ? layout.length(s) - 1 - t : t;
      rows[j] = offsets[s] + pos;
      packed_index[rows[j]] = base + j;
    }
    Var x = ops::gather_rows(gates_in, std::move(rows));
    Var hp = h.rows() == k ? h : ops::slice_rows(h, 0, k);
    Var cp = c.rows() == k ? c : ops::slice_rows(c, 0, k);
    LstmState st = lstm_step_projected(cell, x, hp, cp);
    outputs.push_back(st.h);
    h = st.h;
    c = st.c;
    base += k;
  }
  Var packed = ops::concat_rows(outputs);
  return ops::gather_rows(packed, std::move(packed_index));
}

Var bilstm_packed(const LstmCellVars& forward, const Var& gates_forward, const LstmCellVars& backward,
                  const Var& gates_backward, const PackedLayout& layout) {
  Var parts[] = {lstm_packed(forward, gates_forward, layout, false),
                 lstm_packed(backward, gates_backward, layout, true)};
  return ops::concat_cols(parts);
}

namespace {

std::size_t prefix_length(const std::vector<bool>& mask, std::size_t rows, const char* what) {
  if (mask.size() != rows) {
    throw DimensionError(std::string(what) + ": mask length " + std::to_string(mask.size()) + " != " +
                         std::to_string(rows) + " positions");
  }
  std::size_t n = 0;
  while (n < mask.size() && mask[n]) ++n;
  for (std::size_t t = n; t < mask.size(); ++t)
    if (mask[t]) throw PreconditionError(std::string(what) + ": mask must mark a prefix of real positions");
  return n;
}

}  // namespace

Var bilstm(const LstmCellVars& forward, const LstmCellVars& backward, const Var& seq, const std::vector<bool>& mask) {
  const std::size_t T = seq.rows();
  if (T == 0) throw PreconditionError("bilstm: empty sequence");
  const std::size_t n = prefix_length(mask, T, "bilstm");
  if (n == 0) throw PreconditionError("bilstm: no unmasked position");
  PackedLayout layout({n});
  Var real = n == T ? seq : ops::slice_rows(seq, 0, n);
  Var out = bilstm_packed(forward, project_inputs(forward, real), backward, project_inputs(backward, real), layout);
  if (n == T) return out;

  Tape& tape = seq.tape();
  const std::size_t H = forward.hidden_size;
  Var fwd = ops::slice_cols(out, 0, H);
  Var carried = ops::gather_rows(fwd, std::vector<std::size_t>(T - n, n - 1));
  Var zeros = tape.constant(Tensor({T - n, backward.hidden_size}));
  Var pad_parts[] = {carried, zeros};
  Var rows[] = {out, ops::concat_cols(pad_parts)};
  return ops::concat_rows(rows);
}

AttentionOutput attention_packed(const Var& w, const Var& x, const PackedLayout& layout) {
  if (w.value().size() != x.cols()) {
    throw DimensionError("attention weight has " + std::to_string(w.value().size()) + " entries, inputs have " +
                         std::to_string(x.cols()) + " features");
  }
  if (x.rows() != layout.total()) throw DimensionError("attention inputs do not match the packed layout");
  Var beta = ops::matmul_nt(x, w);
  Var alpha = ops::segment_softmax(beta, layout.offsets());
  AttentionOutput out;
  out.output = ops::segment_weighted_sum(alpha, x, layout.offsets());
  auto a = alpha.value().values();
  out.weights.assign(a.begin(), a.end());
  return out;
}

AttentionOutput attention(const Var& w, const Var& xs, const std::vector<bool>& mask) {
  if (mask.size() != xs.rows()) throw DimensionError("attention: mask length does not match the inputs");
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < mask.size(); ++t)
    if (mask[t]) keep.push_back(t);
  if (keep.empty()) throw PreconditionError("attention: every position is masked");
  PackedLayout layout({keep.size()});
  AttentionOutput packed = attention_packed(w, ops::gather_rows(xs, keep), layout);
  AttentionOutput out;
  out.output = packed.output;
  out.weights.assign(mask.size(), 0.0);
  for (std::size_t i = 0; i < keep.size(); ++i) out.weights[keep[i]] = packed.weights[i];
  return out;
}

void check_dropout_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0,1), got " + std::to_string(p));
}

Var dropout(const Var& x, double p, bool training, SeededRng& rng) {
  check_dropout_probability(p);
  if (!training || p == 0.0) return x;
  Tensor mask(x.value().shape());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform(0.0, 1.0) < p ? 0.0 : keep_scale;
  return ops::mul_const(x, mask);
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw PreconditionError("softmax of an empty vector");
  double m = *std::max_element(x.begin(), x.end());
  std::vector<double> y(x.size());
  double z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) z += (y[i] = std::exp(x[i] - m));
  for (double& v : y) v /= z;
  return y;
}

}  // namespace dicoh
