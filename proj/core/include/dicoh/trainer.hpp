#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicoh/adam.hpp"
#include "dicoh/checkpoint.hpp"
#include "dicoh/losses.hpp"
#include "dicoh/metrics.hpp"
#include "dicoh/model.hpp"
#include "dicoh/pair_dataset.hpp"
#include "dicoh/vocabulary.hpp"

namespace dicoh {

struct TrainConfig {
  Regime regime = Regime::MDiCoh;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double learning_rate = 0.0005;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  std::size_t n_max = 40;
  std::size_t embed_dim = kPretrainedDim;
  std::size_t utt_hidden = 128;
  std::size_t dial_hidden = 256;
  std::size_t num_labels = 4;
  bool trainable_embeddings = true;
  bool dap_after_dropout = false;

  // Throws ConfigError on non-positive sizes or rates.
  void validate() const;
  ModelConfig model_config(std::size_t vocab_size) const;
  std::map<std::string, std::string> to_metadata() const;
  static TrainConfig from_metadata(const std::map<std::string, std::string>& meta);
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> val_macro_f1;
  double metric = 0.0;  // the selection metric of the regime
};

// "epoch=3 train_loss=0.412345 gamma1=1.998 ..." with fixed precision.
std::string format_epoch_log(const EpochLog& log);

// Caches the encoding of each dialogue object by address.
class DialogueEncoder {
 public:
  DialogueEncoder(const Vocabulary& vocab, std::size_t n_max) : vocab_(vocab), n_max_(n_max) {}

  const std::vector<EncodedUtterance>& encode(const Dialogue& dialogue);
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t n_max() const { return n_max_; }

 private:
  const Vocabulary& vocab_;
  std::size_t n_max_;
  std::unordered_map<const Dialogue*, std::vector<EncodedUtterance>> cache_;
};

// Evaluation-mode scores for both sides of every pair. Each distinct
// dialogue is scored once. Dialogue act labels are never read.
std::vector<ScoredPair> score_pairs(CoherenceModel& model, DialogueEncoder& encoder,
                                    const std::vector<DialoguePair>& pairs);

// Predicted label per utterance, dialogue by dialogue.
std::vector<std::vector<int>> predict_acts(CoherenceModel& model, DialogueEncoder& encoder,
                                           const std::vector<std::shared_ptr<const Dialogue>>& dialogues);

// DAP macro-F1 over every utterance of the given labelled dialogues.
F1Report evaluate_dap(CoherenceModel& model, DialogueEncoder& encoder,
                      const std::vector<std::shared_ptr<const Dialogue>>& dialogues);

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  CheckpointData best;  // model, optimizer, vocabulary and config at best_epoch
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains in place; on return `model` holds the parameters of the last
// epoch. Non-finite losses raise TrainingError.
TrainResult train(const TrainConfig& config, const std::vector<DialoguePair>& train_pairs,
                  const std::vector<DialoguePair>& val_pairs, CoherenceModel& model, const Vocabulary& vocab,
                  const EpochCallback& on_epoch = {});

// Checkpoint = parameters + Adam state + vocabulary + resolved config.
CheckpointData make_checkpoint(const TrainConfig& config, const CoherenceModel& model, const Vocabulary& vocab,
                               const AdamState& adam);

struct LoadedModel {
  TrainConfig config;
  Vocabulary vocab;
  std::unique_ptr<CoherenceModel> model;
  AdamState adam;
  std::map<std::string, std::string> metadata;
};

LoadedModel load_model(const CheckpointData& data);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace dicoh
