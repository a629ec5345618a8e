#include "dicoh/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

Tensor uniform(Shape shape, double bound, SeededRng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

std::size_t expected_parameter_count(const ModelConfig& c) {
  const std::size_t E = c.embed_dim, Hu = c.utt_hidden, Hd = c.dial_hidden, A = c.num_labels;
  const std::size_t utt_lstm = 4 * Hu * (E + Hu + 2);
  const std::size_t dial_lstm = 4 * Hd * (2 * Hu + Hd + 2);
  return c.vocab_size * E       // embedding
         + 2 * utt_lstm         // utterance BiLSTM
         + 2 * Hu               // utterance attention
         + 2 * dial_lstm        // dialogue BiLSTM
         + 2 * Hd               // dialogue attention
         + 2 * Hd + 1           // scorer
         + A * 2 * Hu + A       // DAP head
         + 2;                   // eta1, eta2
}

double LossBalance::gamma1() const { return std::exp(eta1->value[0]); }
double LossBalance::gamma2() const { return std::exp(eta2->value[0]); }

CoherenceModel::CoherenceModel(const ModelConfig& config, std::optional<Tensor> embedding) : config_(config) {
  const auto& c = config_;
  if (c.vocab_size < 2 || c.embed_dim == 0 || c.utt_hidden == 0 || c.dial_hidden == 0 || c.num_labels == 0) {
    throw ConfigError("model sizes must be positive and the vocabulary must hold <PAD> and <UNK>");
  }
  check_dropout_probability(c.dropout);
  SeededRng init(c.init_seed);

  Tensor emb;
  if (embedding) {
    if (embedding->rows() != c.vocab_size || embedding->cols() != c.embed_dim || embedding->shape().size() != 2) {
      throw DimensionError("embedding matrix has shape " + shape_string(embedding->shape()) + ", expected [" +
                           std::to_string(c.vocab_size) + "," + std::to_string(c.embed_dim) + "]");
    }
    emb = std::move(*embedding);
  } else {
    emb = uniform({c.vocab_size, c.embed_dim}, 0.05, init);
  }
  for (std::size_t j = 0; j < c.embed_dim; ++j) emb.at(0, j) = 0.0;
  utt_.embedding = &store_.add("embedding", std::move(emb), c.trainable_embeddings);

  const std::size_t u_dim = 2 * c.utt_hidden;
  const std::size_t d_dim = 2 * c.dial_hidden;
  utt_.forward = LstmCellParams::create(store_, "utt_lstm.forward", c.embed_dim, c.utt_hidden, init);
  utt_.backward = LstmCellParams::create(store_, "utt_lstm.backward", c.embed_dim, c.utt_hidden, init);
  utt_.attention.w = &store_.add("utt_attention.w", uniform({u_dim}, fan_in_bound(u_dim), init));

  dial_.forward = LstmCellParams::create(store_, "dial_lstm.forward", u_dim, c.dial_hidden, init);
  dial_.backward = LstmCellParams::create(store_, "dial_lstm.backward", u_dim, c.dial_hidden, init);
  dial_.attention.w = &store_.add("dial_attention.w", uniform({d_dim}, fan_in_bound(d_dim), init));
  dial_.scorer_w = &store_.add("scorer.w", uniform({d_dim}, fan_in_bound(d_dim), init));
  dial_.scorer_b = &store_.add("scorer.b", uniform({1}, fan_in_bound(d_dim), init));

  dap_.w = &store_.add("dap.w", uniform({c.num_labels, u_dim}, fan_in_bound(u_dim), init));
  dap_.b = &store_.add("dap.b", uniform({c.num_labels}, fan_in_bound(u_dim), init));

  balance_.eta1 = &store_.add("balance.eta1", Tensor::scalar(std::log(2.0)));
  balance_.eta2 = &store_.add("balance.eta2", Tensor::scalar(std::log(2.0)));

  const std::size_t expected = expected_parameter_count(c);
  if (store_.scalar_count() != expected) {
    throw Error("model holds " + std::to_string(store_.scalar_count()) + " scalars, expected " +
                std::to_string(expected));
  }
}

void CoherenceModel::discard_pad_gradient() {
  Tensor& g = utt_.embedding->grad;
  if (g.empty()) return;
  for (std::size_t j = 0; j < g.cols(); ++j) g.at(Vocabulary::kPad, j) = 0.0;
}

std::size_t DialogueBatch::add_dialogue(const std::vector<EncodedUtterance>& utterances) {
  std::vector<std::size_t> slots;
  slots.reserve(utterances.size());
  for (const auto& u : utterances) {
    if (u.length == 0) continue;  // fully padded slot
    std::vector<std::size_t> key(u.ids.begin(), u.ids.begin() + static_cast<std::ptrdiff_t>(u.length));
    auto [it, inserted] = index_.try_emplace(std::move(key), utterances_.size());
    if (inserted) utterances_.push_back(u);
    slots.push_back(it->second);
  }
  if (slots.empty()) throw PreconditionError("dialogue with no utterances");
  slots_ += slots.size();
  dialogues_.push_back(std::move(slots));
  return dialogues_.size() - 1;
}

BatchForward forward(Tape& tape, CoherenceModel& model, const DialogueBatch& batch, bool training, SeededRng& rng) {
  const ModelConfig& cfg = model.config();
  if (batch.dialogues().empty()) throw PreconditionError("forward on an empty batch");
  auto& utt = model.utterance_encoder();
  auto& dial = model.dialogue_encoder();
  auto& dap = model.dap_head();

  // Word level: project each distinct token type once, then gather.
  const auto& utterances = batch.utterances();
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> types;
  std::unordered_map<std::size_t, std::size_t> type_of;
  std::vector<std::size_t> token_type;
  for (const auto& u : utterances) {
    lengths.push_back(u.length);
    for (std::size_t t = 0; t < u.length; ++t) {
      const std::size_t id = u.ids[t];
      if (id >= cfg.vocab_size) throw DimensionError("token index " + std::to_string(id) + " beyond the vocabulary");
      auto [it, inserted] = type_of.try_emplace(id, types.size());
      if (inserted) types.push_back(id);
      token_type.push_back(it->second);
    }
  }
  PackedLayout words(lengths);

  Var embedding = tape.parameter(*utt.embedding);
  Var typed = ops::gather_rows(embedding, types);
  LstmCellVars uf = bind(tape, utt.forward);
  LstmCellVars ub = bind(tape, utt.backward);
  Var gates_f = ops::gather_rows(project_inputs(uf, typed), token_type);
  Var gates_b = ops::gather_rows(project_inputs(ub, typed), token_type);
  Var hidden_u = bilstm_packed(uf, gates_f, ub, gates_b, words);
  AttentionOutput word_att = attention_packed(tape.parameter(*utt.attention.w), hidden_u, words);

  BatchForward out;
  out.utterance_vectors = word_att.output;
  out.word_attention.reserve(utterances.size());
  for (std::size_t s = 0; s < utterances.size(); ++s) {
    const auto b = words.offsets()[s], e = words.offsets()[s + 1];
    out.word_attention.emplace_back(word_att.weights.begin() + static_cast<std::ptrdiff_t>(b),
                                    word_att.weights.begin() + static_cast<std::ptrdiff_t>(e));
  }

  // Dialogue level: one row per utterance slot.
  std::vector<std::size_t> slot_utterance;
  std::vector<std::size_t> dial_lengths;
  out.slot_offsets.push_back(0);
  for (const auto& d : batch.dialogues()) {
    slot_utterance.insert(slot_utterance.end(), d.begin(), d.end());
    dial_lengths.push_back(d.size());
    out.slot_offsets.push_back(slot_utterance.size());
  }
  PackedLayout slots(dial_lengths);
  Var slot_vectors = ops::gather_rows(out.utterance_vectors, slot_utterance);
  Var dropped = dropout(slot_vectors, cfg.dropout, training, rng);

  LstmCellVars df = bind(tape, dial.forward);
  LstmCellVars db = bind(tape, dial.backward);
  Var hidden_d = bilstm_packed(df, project_inputs(df, dropped), db, project_inputs(db, dropped), slots);
  AttentionOutput dial_att = attention_packed(tape.parameter(*dial.attention.w), hidden_d, slots);
  out.scores = ops::add_row(ops::matmul_nt(dial_att.output, tape.parameter(*dial.scorer_w)),
                            tape.parameter(*dial.scorer_b));
  for (std::size_t d = 0; d < dial_lengths.size(); ++d) {
    const auto b = slots.offsets()[d], e = slots.offsets()[d + 1];
    out.utterance_attention.emplace_back(dial_att.weights.begin() + static_cast<std::ptrdiff_t>(b),
                                         dial_att.weights.begin() + static_cast<std::ptrdiff_t>(e));
  }

  Var dap_input = cfg.dap_after_dropout ? dropped : slot_vectors;
  Var logits = ops::add_row(ops::matmul_nt(dap_input, tape.parameter(*dap.w)), tape.parameter(*dap.b));
  out.dap_log_probs = ops::log_softmax_rows(logits);
  return out;
}

Var encode_utterance_vector(Tape& tape, CoherenceModel& model, const EncodedUtterance& utterance, bool training,
                            SeededRng& rng) {
  DialogueBatch batch;
  batch.add_dialogue({utterance});
  BatchForward f = forward(tape, model, batch, false, rng);
  return dropout(f.utterance_vectors, model.config().dropout, training, rng);
}

DialogueScore score_dialogue(Tape& tape, CoherenceModel& model, const std::vector<EncodedUtterance>& dialogue,
                             bool training, SeededRng& rng) {
  if (dialogue.empty()) throw PreconditionError("score_dialogue: dialogue has no utterances");
  DialogueBatch batch;
  batch.add_dialogue(dialogue);
  BatchForward f = forward(tape, model, batch, training, rng);
  DialogueScore s;
  s.score = f.scores;
  s.utterance_vectors = ops::gather_rows(f.utterance_vectors, batch.dialogues()[0]);
  for (std::size_t u : batch.dialogues()[0]) s.word_attention.push_back(f.word_attention[u]);
  s.utterance_attention = f.utterance_attention[0];
  return s;
}

Var predict_dialogue_acts(Tape& tape, const DapHeadParams& head, const Var& utterance_vectors) {
  Var logits = ops::add_row(ops::matmul_nt(utterance_vectors, tape.parameter(*head.w)), tape.parameter(*head.b));
  return ops::softmax_rows(logits);
}

std::vector<double> score_dialogues(CoherenceModel& model, const std::vector<std::vector<EncodedUtterance>>& dialogues,
                                    std::size_t chunk) {
  std::vector<double> scores;
  scores.reserve(dialogues.size());
  SeededRng unused(0);
  for (std::size_t begin = 0; begin < dialogues.size(); begin += chunk) {
    const std::size_t end = std::min(dialogues.size(), begin + chunk);
    DialogueBatch batch;
    for (std::size_t i = begin; i < end; ++i) batch.add_dialogue(dialogues[i]);
    Tape tape;
    BatchForward f = forward(tape, model, batch, false, unused);
    for (std::size_t i = 0; i < end - begin; ++i) scores.push_back(f.scores.value()[i]);
  }
  return scores;
}

}  // namespace dicoh
