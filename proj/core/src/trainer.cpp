#include "dicoh/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "dicoh/error.hpp"
#include "dicoh/tokenizer.hpp"

namespace dicoh {
namespace {

constexpr std::size_t kEvalChunk = 256;
constexpr std::uint64_t kDropoutStream = 0xd20f;
constexpr std::uint64_t kShuffleStream = 0x5bff;

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const std::string& need(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw CompatibilityError("checkpoint lacks '" + key + "'");
  return it->second;
}

void check_labels(const Dialogue& d, std::size_t num_labels) {
  if (!d.has_labels()) throw DataError("dialogue '" + d.id + "' has no dialogue act labels");
  for (std::size_t k = 0; k < d.da_labels.size(); ++k) {
    const int a = d.da_labels[k];
    if (a < 0 || static_cast<std::size_t>(a) >= num_labels) {
      throw DataError("dialogue '" + d.id + "': label " + std::to_string(a) + " out of range at utterance " +
                      std::to_string(k));
    }
  }
}

bool all_labelled(const std::vector<std::shared_ptr<const Dialogue>>& dialogues) {
  return std::all_of(dialogues.begin(), dialogues.end(), [](const auto& d) { return d->has_labels(); });
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || n_max == 0 || embed_dim == 0 || utt_hidden == 0 || dial_hidden == 0 ||
      num_labels == 0) {
    throw ConfigError("epochs, batch_size, n_max and model sizes must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

ModelConfig TrainConfig::model_config(std::size_t vocab_size) const {
  ModelConfig m;
  m.vocab_size = vocab_size;
  m.embed_dim = embed_dim;
  m.utt_hidden = utt_hidden;
  m.dial_hidden = dial_hidden;
  m.num_labels = num_labels;
  m.dropout = dropout;
  m.dap_after_dropout = dap_after_dropout;
  m.trainable_embeddings = trainable_embeddings;
  m.init_seed = seed;
  return m;
}

std::map<std::string, std::string> TrainConfig::to_metadata() const {
  return {
      {"config.regime", regime_name(regime)},
      {"config.epochs", std::to_string(epochs)},
      {"config.batch_size", std::to_string(batch_size)},
      {"config.learning_rate", exact(learning_rate)},
      {"config.dropout", exact(dropout)},
      {"config.seed", std::to_string(seed)},
      {"config.n_max", std::to_string(n_max)},
      {"config.embed_dim", std::to_string(embed_dim)},
      {"config.utt_hidden", std::to_string(utt_hidden)},
      {"config.dial_hidden", std::to_string(dial_hidden)},
      {"config.num_labels", std::to_string(num_labels)},
      {"config.trainable_embeddings", trainable_embeddings ? "true" : "false"},
      {"config.dap_after_dropout", dap_after_dropout ? "true" : "false"},
  };
}

TrainConfig TrainConfig::from_metadata(const std::map<std::string, std::string>& m) {
  TrainConfig c;
  c.regime = parse_regime(need(m, "config.regime"));
  c.epochs = std::stoull(need(m, "config.epochs"));
  c.batch_size = std::stoull(need(m, "config.batch_size"));
  c.learning_rate = std::stod(need(m, "config.learning_rate"));
  c.dropout = std::stod(need(m, "config.dropout"));
  c.seed = std::stoull(need(m, "config.seed"));
  c.n_max = std::stoull(need(m, "config.n_max"));
  c.embed_dim = std::stoull(need(m, "config.embed_dim"));
  c.utt_hidden = std::stoull(need(m, "config.utt_hidden"));
  c.dial_hidden = std::stoull(need(m, "config.dial_hidden"));
  c.num_labels = std::stoull(need(m, "config.num_labels"));
  c.trainable_embeddings = need(m, "config.trainable_embeddings") == "true";
  c.dap_after_dropout = need(m, "config.dap_after_dropout") == "true";
  return c;
}

std::string format_epoch_log(const EpochLog& log) {
  std::string s = "epoch=" + std::to_string(log.epoch) + " train_loss=" + fixed(log.train_loss, 6) +
                  " gamma1=" + fixed(log.gamma1, 6) + " gamma2=" + fixed(log.gamma2, 6);
  s += " val_accuracy=" + (log.val_accuracy ? fixed(*log.val_accuracy, 6) : std::string("na"));
  s += " val_macro_f1=" + (log.val_macro_f1 ? fixed(*log.val_macro_f1, 6) : std::string("na"));
  return s;
}

const std::vector<EncodedUtterance>& DialogueEncoder::encode(const Dialogue& d) {
  auto it = cache_.find(&d);
  if (it != cache_.end()) return it->second;
  std::vector<EncodedUtterance> enc;
  enc.reserve(d.size());
  for (const auto& u : d.utterances) enc.push_back(encode_utterance(tokenize(u), vocab_, n_max_));
  return cache_.emplace(&d, std::move(enc)).first->second;
}

std::vector<ScoredPair> score_pairs(CoherenceModel& model, DialogueEncoder& encoder,
                                    const std::vector<DialoguePair>& pairs) {
  std::unordered_map<const Dialogue*, std::size_t> slot;
  std::vector<std::vector<EncodedUtterance>> unique;
  auto index_of = [&](const PairSide& side) {
    auto [it, inserted] = slot.try_emplace(side.dialogue.get(), unique.size());
    if (inserted) unique.push_back(encoder.encode(*side.dialogue));
    return it->second;
  };
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) {
    const std::size_t ia = index_of(p.a);
    const std::size_t ib = index_of(p.b);
    refs.emplace_back(ia, ib);
  }
  const std::vector<double> scores = score_dialogues(model, unique, kEvalChunk);
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back({scores[refs[i].first], scores[refs[i].second], pairs[i].label});
  return out;
}

std::vector<std::vector<int>> predict_acts(CoherenceModel& model, DialogueEncoder& encoder,
                                           const std::vector<std::shared_ptr<const Dialogue>>& dialogues) {
  std::vector<std::vector<int>> out;
  out.reserve(dialogues.size());
  SeededRng unused(0);
  for (std::size_t begin = 0; begin < dialogues.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(dialogues.size(), begin + kEvalChunk);
    DialogueBatch batch;
    for (std::size_t i = begin; i < end; ++i) batch.add_dialogue(encoder.encode(*dialogues[i]));
    Tape tape;
    BatchForward f = forward(tape, model, batch, false, unused);
    const Tensor& lp = f.dap_log_probs.value();
    const std::size_t labels = lp.cols();
    for (std::size_t d = 0; d + 1 < f.slot_offsets.size(); ++d) {
      std::vector<int> pred;
      for (std::size_t r = f.slot_offsets[d]; r < f.slot_offsets[d + 1]; ++r) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < labels; ++k) {
          if (lp.at(r, k) > lp.at(r, best)) best = k;
        }
        pred.push_back(static_cast<int>(best));
      }
      out.push_back(std::move(pred));
    }
  }
  return out;
}

F1Report evaluate_dap(CoherenceModel& model, DialogueEncoder& encoder,
                      const std::vector<std::shared_ptr<const Dialogue>>& dialogues) {
  const std::size_t labels = model.config().num_labels;
  for (const auto& d : dialogues) check_labels(*d, labels);
  const auto predicted = predict_acts(model, encoder, dialogues);
  std::vector<int> pred, gold;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    pred.insert(pred.end(), predicted[i].begin(), predicted[i].end());
    gold.insert(gold.end(), dialogues[i]->da_labels.begin(), dialogues[i]->da_labels.end());
  }
  return macro_f1(pred, gold, labels);
}

CheckpointData make_checkpoint(const TrainConfig& config, const CoherenceModel& model, const Vocabulary& vocab,
                               const AdamState& adam) {
  CheckpointData data;
  data.metadata = config.to_metadata();
  data.metadata["format"] = "dicoh-model-1";
  std::string joined;
  for (const auto& t : vocab.tokens()) joined += t + "\n";
  data.metadata["vocab"] = joined;
  data.metadata["vocab_hash"] = hash_hex(vocab.hash());
  store_parameters(data, model.params());
  store_adam(data, adam);
  return data;
}

LoadedModel load_model(const CheckpointData& data) {
  if (need(data.metadata, "format") != "dicoh-model-1") throw CompatibilityError("not a dicoh model checkpoint");
  LoadedModel out;
  out.metadata = data.metadata;
  out.config = TrainConfig::from_metadata(data.metadata);
  std::vector<std::string> tokens;
  std::istringstream in(need(data.metadata, "vocab"));
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw CompatibilityError("checkpoint vocabulary is malformed");
  }
  out.vocab = Vocabulary::from_tokens(std::vector<std::string>(tokens.begin() + 2, tokens.end()));
  if (hash_hex(out.vocab.hash()) != need(data.metadata, "vocab_hash")) {
    throw CompatibilityError("checkpoint vocabulary does not match its recorded hash");
  }
  out.model = std::make_unique<CoherenceModel>(out.config.model_config(out.vocab.size()));
  restore_parameters(data, out.model->params());
  out.adam = restore_adam(data);
  return out;
}

LoadedModel load_model(const std::filesystem::path& path) { return load_model(read_checkpoint(path)); }

TrainResult train(const TrainConfig& config, const std::vector<DialoguePair>& train_pairs,
                  const std::vector<DialoguePair>& val_pairs, CoherenceModel& model, const Vocabulary& vocab,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_pairs.empty() || val_pairs.empty()) throw PreconditionError("training needs nonempty train and validation pairs");
  if (model.config().vocab_size != vocab.size()) {
    throw ConfigError("model vocabulary size " + std::to_string(model.config().vocab_size) +
                      " differs from the vocabulary (" + std::to_string(vocab.size()) + ")");
  }
  const std::size_t num_labels = model.config().num_labels;
  const bool dap = uses_dap(config.regime);
  if (dap) {
    for (const auto& p : train_pairs) {
      check_labels(*p.a.dialogue, num_labels);
      check_labels(*p.b.dialogue, num_labels);
    }
  }

  DialogueEncoder train_encoder(vocab, config.n_max);
  DialogueEncoder val_encoder(vocab, config.n_max);
  const auto val_originals = original_dialogues(val_pairs);
  const bool val_labelled = all_labelled(val_originals);
  if (is_dap_regime(config.regime) && !val_labelled) {
    throw DataError("DAP model selection needs labelled validation dialogues");
  }

  AdamState adam;
  adam.learning_rate = config.learning_rate;
  SeededRng dropout_rng(mix_seed(config.seed, kDropoutStream));
  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    SeededRng shuffle_rng(mix_seed(mix_seed(config.seed, kShuffleStream), epoch));
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      DialogueBatch batch;
      std::vector<std::size_t> preferred, other, side_a, side_b;
      std::vector<int> gold;
      for (std::size_t i = begin; i < end; ++i) {
        const DialoguePair& p = train_pairs[order[i]];
        const std::size_t a = batch.add_dialogue(train_encoder.encode(*p.a.dialogue));
        const std::size_t b = batch.add_dialogue(train_encoder.encode(*p.b.dialogue));
        preferred.push_back(p.label == 0 ? a : b);
        other.push_back(p.label == 0 ? b : a);
        side_a.push_back(a);
        side_b.push_back(b);
        if (dap) {
          gold.insert(gold.end(), p.a.dialogue->da_labels.begin(), p.a.dialogue->da_labels.end());
          gold.insert(gold.end(), p.b.dialogue->da_labels.begin(), p.b.dialogue->da_labels.end());
        }
      }

      model.params().zero_grad();
      Tape tape;
      BatchForward f = forward(tape, model, batch, true, dropout_rng);
      Var l_coh, l_da_a, l_da_b;
      if (uses_coherence(config.regime)) l_coh = ops::mean(pair_hinge_losses(f.scores, preferred, other));
      if (dap) {
        Var per_dialogue = segment_dap_losses(f.dap_log_probs, gold, f.slot_offsets);
        l_da_a = ops::mean(ops::gather_rows(per_dialogue, side_a));
        l_da_b = ops::mean(ops::gather_rows(per_dialogue, side_b));
      }
      Var loss;
      switch (config.regime) {
        case Regime::SDiCoh:
          loss = l_coh;
          break;
        case Regime::SDap:
          loss = ops::scale(ops::add(l_da_a, l_da_b), 0.5);
          break;
        case Regime::MDiCoh:
        case Regime::MDap:
          loss = total_loss(l_coh, l_da_a, l_da_b, tape.parameter(*model.balance().eta1),
                            tape.parameter(*model.balance().eta2));
          break;
      }
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index + 1));
      }
      tape.backward(loss);
      model.discard_pad_gradient();
      adam_update(adam, model.params());
      loss_sum += value * static_cast<double>(end - begin);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(order.size());
    log.gamma1 = model.balance().gamma1();
    log.gamma2 = model.balance().gamma2();
    log.val_accuracy = pairwise_accuracy(score_pairs(model, val_encoder, val_pairs)).accuracy;
    if (val_labelled) log.val_macro_f1 = evaluate_dap(model, val_encoder, val_originals).macro_f1;
    log.metric = is_dap_regime(config.regime) ? *log.val_macro_f1 : *log.val_accuracy;
    result.epochs.push_back(log);
    if (epoch == 1 || log.metric > result.best_metric) {
      result.best_epoch = epoch;
      result.best_metric = log.metric;
      result.best = make_checkpoint(config, model, vocab, adam);
      result.best.metadata["best_epoch"] = std::to_string(epoch);
      result.best.metadata["best_metric"] = exact(log.metric);
    }
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace dicoh
