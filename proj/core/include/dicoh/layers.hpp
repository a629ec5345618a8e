#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dicoh/autodiff.hpp"
#include "dicoh/parameters.hpp"
#include "dicoh/rng.hpp"

namespace dicoh {

// LSTM cell weights. The four gates are stacked row-wise in the order
// input, forget, cell, output, so rows [0,H) of w_input hold W_ii, rows
// [H,2H) hold W_if, [2H,3H) W_ig and [3H,4H) W_io; likewise for w_hidden
// (W_hi, W_hf, W_hg, W_ho) and the two bias vectors (b_i*, b_h*).
struct LstmCellParams {
  Parameter* w_input = nullptr;   // 4H x input_size
  Parameter* w_hidden = nullptr;  // 4H x H
  Parameter* b_input = nullptr;   // 4H
  Parameter* b_hidden = nullptr;  // 4H
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  // Registers "<prefix>.w_input" etc. in the store, initialised uniformly in
  // [-1/sqrt(H), 1/sqrt(H)].
  static LstmCellParams create(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                               std::size_t hidden_size, SeededRng& init);
  // Re-binds to parameters already present in a store.
  static LstmCellParams lookup(ParameterStore& store, const std::string& prefix);

  void validate() const;
  std::size_t scalar_count() const;
};

// LstmCellParams recorded on a tape.
struct LstmCellVars {
  Var w_input, w_hidden, b_input, b_hidden;
  std::size_t hidden_size = 0;
  std::size_t input_size = 0;
};

LstmCellVars bind(Tape& tape, const LstmCellParams& params);

struct LstmState {
  Var h;
  Var c;
};

// One LSTM step on a batch of rows: input (k x input_size), h_prev and
// c_prev (k x H).
LstmState lstm_step(const LstmCellVars& cell, const Var& input, const Var& h_prev, const Var& c_prev);

// Same step with the input half of the gate pre-activations already
// computed: gates_in = input * w_input^T + b_input, (k x 4H).
LstmState lstm_step_projected(const LstmCellVars& cell, const Var& gates_in, const Var& h_prev, const Var& c_prev);

// Gate pre-activations from the input side for all rows of `inputs`.
Var project_inputs(const LstmCellVars& cell, const Var& inputs);

// Several variable-length sequences stored back to back: sequence s owns
// rows [offsets[s], offsets[s+1]) of a flat matrix, in time order.
class PackedLayout {
 public:
  explicit PackedLayout(std::vector<std::size_t> lengths);

  std::size_t sequences() const { return lengths_.size(); }
  std::size_t total() const { return offsets_.back(); }
  std::size_t length(std::size_t s) const { return lengths_[s]; }
  std::size_t max_length() const { return max_length_; }
  const std::vector<std::size_t>& offsets() const { return offsets_; }
  // Sequences ordered by decreasing length (stable).
  const std::vector<std::size_t>& by_length() const { return order_; }

 private:
  std::vector<std::size_t> lengths_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> order_;
  std::size_t max_length_ = 0;
};

// Runs one LSTM direction over packed sequences. gates_in holds the
// input-side pre-activations (total x 4H) in the flat layout; the result is
// the hidden state at every real position (total x H) in the same layout.
// Each sequence starts from zero state. With reverse=true every sequence is
// consumed from its last element to its first.
Var lstm_packed(const LstmCellVars& cell, const Var& gates_in, const PackedLayout& layout, bool reverse);

// Forward and backward directions concatenated per position (total x 2H).
Var bilstm_packed(const LstmCellVars& forward, const Var& gates_forward, const LstmCellVars& backward,
                  const Var& gates_backward, const PackedLayout& layout);

// BiLSTM over a single padded sequence seq (T x input_size). mask marks real
// positions and must be a non-empty prefix. Padded positions carry state
// through unchanged: the forward half repeats the last real state and the
// backward half stays at its zero initial state.
Var bilstm(const LstmCellVars& forward, const LstmCellVars& backward, const Var& seq, const std::vector<bool>& mask);

struct AttentionOutput {
  Var output;                   // (segments x D)
  std::vector<double> weights;  // one weight per input row; 0 at masked rows
};

// Self-attention pooling with beta_t = x_t . w and no bias, applied
// independently to each segment of a packed matrix x (total x D).
AttentionOutput attention_packed(const Var& w, const Var& x, const PackedLayout& layout);

// Self-attention over one padded sequence xs (T x D). Masked positions
// receive no weight; at least one position must be unmasked.
AttentionOutput attention(const Var& w, const Var& xs, const std::vector<bool>& mask);

// Inverted dropout. Identity when training is false or p == 0.
Var dropout(const Var& x, double p, bool training, SeededRng& rng);
void check_dropout_probability(double p);

// Max-subtracted softmax of a plain vector.
std::vector<double> softmax(std::span<const double> x);

}  // namespace dicoh
