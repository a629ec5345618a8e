#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dicoh/autodiff.hpp"
#include "dicoh/embeddings.hpp"
#include "dicoh/layers.hpp"
#include "dicoh/parameters.hpp"
#include "dicoh/rng.hpp"

namespace dicoh {

struct ModelConfig {
  std::size_t vocab_size = 2;
  std::size_t embed_dim = kPretrainedDim;
  std::size_t utt_hidden = 128;
  std::size_t dial_hidden = 256;
  std::size_t num_labels = 4;
  double dropout = 0.1;
  bool dap_after_dropout = false;
  bool trainable_embeddings = true;
  std::uint64_t init_seed = 0;
};

// Scalar parameter count implied by a configuration.
std::size_t expected_parameter_count(const ModelConfig& config);

// Attention pooling weight: beta_t = x_t . w.
struct AttentionParams {
  Parameter* w = nullptr;
};

struct UtteranceEncoderParams {
  Parameter* embedding = nullptr;
  LstmCellParams forward;
  LstmCellParams backward;
  AttentionParams attention;
};

struct DialogueEncoderParams {
  LstmCellParams forward;
  LstmCellParams backward;
  AttentionParams attention;
  Parameter* scorer_w = nullptr;  // 2 * dial_hidden
  Parameter* scorer_b = nullptr;  // 1
};

struct DapHeadParams {
  Parameter* w = nullptr;  // num_labels x 2 * utt_hidden
  Parameter* b = nullptr;  // num_labels
};

// Trainable loss weights gamma_i = exp(eta_i).
struct LossBalance {
  Parameter* eta1 = nullptr;
  Parameter* eta2 = nullptr;

  double gamma1() const;
  double gamma2() const;
};

// Shared utterance encoder, DiCoh dialogue scorer and DAP head, plus the
// two loss-balance scalars. All tensors live in one ParameterStore.
class CoherenceModel {
 public:
  // `embedding` must be vocab_size x embed_dim when given; otherwise rows
  // are drawn uniformly from [-0.05, 0.05]. Row 0 is forced to zero.
  explicit CoherenceModel(const ModelConfig& config, std::optional<Tensor> embedding = std::nullopt);

  CoherenceModel(const CoherenceModel&) = delete;
  CoherenceModel& operator=(const CoherenceModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

  UtteranceEncoderParams& utterance_encoder() { return utt_; }
  DialogueEncoderParams& dialogue_encoder() { return dial_; }
  DapHeadParams& dap_head() { return dap_; }
  LossBalance& balance() { return balance_; }
  const LossBalance& balance() const { return balance_; }

  // Zeroes the <PAD> row of the embedding gradient.
  void discard_pad_gradient();

 private:
  ModelConfig config_;
  ParameterStore store_;
  UtteranceEncoderParams utt_;
  DialogueEncoderParams dial_;
  DapHeadParams dap_;
  LossBalance balance_;
};

// A set of dialogues encoded against a vocabulary. Identical utterances are
// stored once and shared by every dialogue slot that uses them.
class DialogueBatch {
 public:
  // Returns the index of the added dialogue. Fully padded utterances
  // (length 0) are masked slots and are dropped.
  std::size_t add_dialogue(const std::vector<EncodedUtterance>& utterances);

  const std::vector<EncodedUtterance>& utterances() const { return utterances_; }
  const std::vector<std::vector<std::size_t>>& dialogues() const { return dialogues_; }
  std::size_t slot_count() const { return slots_; }

 private:
  std::vector<EncodedUtterance> utterances_;
  std::vector<std::vector<std::size_t>> dialogues_;
  std::map<std::vector<std::size_t>, std::size_t> index_;  // real token ids -> utterance
  std::size_t slots_ = 0;
};

struct BatchForward {
  Var scores;             // dialogues x 1
  Var utterance_vectors;  // distinct utterances x 2*utt_hidden (before dropout)
  Var dap_log_probs;      // utterance slots x num_labels, dialogue by dialogue
  std::vector<std::size_t> slot_offsets;               // dialogues + 1 entries
  std::vector<std::vector<double>> word_attention;     // per distinct utterance
  std::vector<std::vector<double>> utterance_attention;  // per dialogue
};

BatchForward forward(Tape& tape, CoherenceModel& model, const DialogueBatch& batch, bool training, SeededRng& rng);

// Utterance vector u for a single utterance, with dropout in training mode.
Var encode_utterance_vector(Tape& tape, CoherenceModel& model, const EncodedUtterance& utterance, bool training,
                            SeededRng& rng);

struct DialogueScore {
  Var score;              // 1 x 1
  Var utterance_vectors;  // m x 2*utt_hidden
  std::vector<std::vector<double>> word_attention;
  std::vector<double> utterance_attention;
};

DialogueScore score_dialogue(Tape& tape, CoherenceModel& model, const std::vector<EncodedUtterance>& dialogue,
                             bool training, SeededRng& rng);

// softmax(W u + b) for every row of utterance_vectors.
Var predict_dialogue_acts(Tape& tape, const DapHeadParams& head, const Var& utterance_vectors);

// Evaluation-mode coherence scores, computed in chunks of dialogues.
std::vector<double> score_dialogues(CoherenceModel& model, const std::vector<std::vector<EncodedUtterance>>& dialogues,
                                    std::size_t chunk = 256);

}  // namespace dicoh
