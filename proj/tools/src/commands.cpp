#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dicoh/baselines.hpp"
#include "dicoh/corpus.hpp"
#include "dicoh/error.hpp"
#include "dicoh/metrics.hpp"
#include "dicoh/pair_dataset.hpp"
#include "dicoh/tokenizer.hpp"
#include "dicoh/trainer.hpp"
#include "run_config.hpp"

namespace dicoh::cli {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kResolvedConfig = "config.resolved";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kModelFile = "model.ckpt";
const char* const kSplitNames[] = {"train", "validation", "test"};

struct Context {
  RunConfig config;
  std::string command;
  std::ostream& out;
  std::ostream& err;
};

fs::path data_root(const RunConfig& c) {
  if (c.has("data_root")) return c.str("data_root");
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return env;
  return fs::current_path();
}

fs::path resolve_input(const RunConfig& c, const std::string& value) {
  fs::path p(value);
  if (fs::exists(p)) return p;
  if (p.is_relative()) {
    fs::path under = data_root(c) / p;
    if (fs::exists(under)) return under;
  }
  throw UsageError("no such file or directory: " + value);
}

fs::path output_dir(const Context& ctx) {
  fs::path dir;
  if (ctx.config.has("out")) {
    dir = ctx.config.str("out");
  } else {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    std::ostringstream name;
    name << ctx.command << "-" << std::put_time(&tm, "%Y%m%d-%H%M%S") << "-s" << ctx.config.str("seed");
    dir = data_root(ctx.config) / "runs" / name.str();
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json stats_json(const CorpusStats& s, const LabelSet& labels) {
  json counts = json::object();
  for (std::size_t k = 0; k < labels.size(); ++k) counts[labels.names[k]] = s.label_counts[k];
  return {{"dialogues", s.dialogues},
          {"utterances", s.utterances},
          {"words", s.words},
          {"utterances_per_dialogue", s.utterances_per_dialogue()},
          {"words_per_utterance", s.words_per_utterance()},
          {"label_counts", counts}};
}

std::string two(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// ---------------------------------------------------------------- prepare

struct RawLayout {
  bool official = false;
  fs::path text;  // single-file layout
  fs::path acts;
  std::vector<std::pair<fs::path, fs::path>> splits;  // official layout, train/validation/test
};

RawLayout find_raw_files(const RunConfig& c) {
  RawLayout layout;
  const fs::path input = resolve_input(c, c.str("input"));
  if (fs::is_regular_file(input)) {
    if (!c.has("acts")) throw UsageError("--acts is required when --input names a file");
    layout.text = input;
    layout.acts = resolve_input(c, c.str("acts"));
    return layout;
  }
  bool nested = true, flat = true;
  for (const char* s : kSplitNames) {
    const std::string split = s;
    nested = nested && fs::is_regular_file(input / split / ("dialogues_" + split + ".txt"));
    flat = flat && fs::is_regular_file(input / ("dialogues_" + split + ".txt"));
  }
  if (nested || flat) {
    layout.official = true;
    for (const char* s : kSplitNames) {
      const std::string split = s;
      const fs::path dir = nested ? input / split : input;
      layout.splits.emplace_back(dir / ("dialogues_" + split + ".txt"), dir / ("dialogues_act_" + split + ".txt"));
    }
    return layout;
  }
  if (fs::is_regular_file(input / "dialogues_text.txt")) {
    layout.text = input / "dialogues_text.txt";
    layout.acts = input / "dialogues_act.txt";
    return layout;
  }
  throw UsageError("no DailyDialog files found under " + input.string());
}

int cmd_prepare(Context& ctx) {
  const RunConfig& c = ctx.config;
  const RawLayout layout = find_raw_files(c);
  const std::uint64_t seed = c.u64("seed");
  Splits splits;
  std::size_t skipped = 0;
  auto report = [&](const ParsedCorpus& p) {
    skipped += p.skipped_empty;
    for (const auto& w : p.warnings) ctx.err << "warning: " << w << "\n";
  };
  if (layout.official) {
    CorpusSplit* targets[] = {&splits.train, &splits.validation, &splits.test};
    for (std::size_t k = 0; k < 3; ++k) {
      ParsedCorpus p = parse_dailydialog(layout.splits[k].first, layout.splits[k].second, kSplitNames[k]);
      report(p);
      targets[k]->dialogues = std::move(p.dialogues);
    }
    if (c.has("max_dialogues")) {
      const double n = static_cast<double>(c.size("max_dialogues"));
      const double share[] = {0.8, 0.1, 0.1};
      for (std::size_t k = 0; k < 3; ++k) {
        auto& d = targets[k]->dialogues;
        d.resize(std::min(d.size(), static_cast<std::size_t>(n * share[k] + 1e-9)));
      }
    }
  } else {
    ParsedCorpus p = parse_dailydialog(layout.text, layout.acts, "dd");
    report(p);
    if (c.has("max_dialogues") && p.dialogues.size() > c.size("max_dialogues")) {
      p.dialogues.resize(c.size("max_dialogues"));
    }
    splits = split_corpus(std::move(p.dialogues), {}, seed);
  }

  const fs::path out = output_dir(ctx);
  write_corpus_dir(out, splits);

  const LabelSet labels = LabelSet::dailydialog();
  json stats{{"layout", layout.official ? "official" : "single"}, {"skipped_empty", skipped}};
  std::vector<Dialogue> all;
  std::vector<std::vector<std::string>> rows;
  for (const CorpusSplit* s : {&splits.train, &splits.validation, &splits.test}) {
    const CorpusStats st = compute_stats(s->dialogues, labels.size());
    stats["splits"][s->name] = stats_json(st, labels);
    rows.push_back({s->name, std::to_string(st.dialogues), std::to_string(st.utterances),
                    two(st.utterances_per_dialogue()), two(st.words_per_utterance())});
    all.insert(all.end(), s->dialogues.begin(), s->dialogues.end());
  }
  const CorpusStats total = compute_stats(all, labels.size());
  stats["total"] = stats_json(total, labels);
  rows.push_back({"total", std::to_string(total.dialogues), std::to_string(total.utterances),
                  two(total.utterances_per_dialogue()), two(total.words_per_utterance())});
  write_text(out / "stats.json", stats.dump(2) + "\n");
  const std::string table =
      render_table({"split", "dialogues", "utterances", "utterances/dialogue", "words/utterance"}, rows);
  write_text(out / "stats.txt", table);
  c.write(out / kResolvedConfig, {"input", "acts", "seed", "max_dialogues", "out", "data_root"});
  ctx.out << table << "corpus written to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- perturb

int cmd_perturb(Context& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path corpus_dir = resolve_input(c, c.str("corpus"));
  const Domain domain = parse_domain(c.str("domain"));
  const std::uint64_t seed = c.u64("seed");
  const std::size_t per_dialogue = c.size("per_dialogue");
  if (per_dialogue == 0) throw ConfigError("per_dialogue must be positive");
  const Splits splits = read_corpus_dir(corpus_dir);

  std::vector<std::vector<std::string>> texts;
  for (const auto& d : splits.train.dialogues) {
    for (const auto& u : d.utterances) texts.push_back(tokenize(u));
  }
  const Vocabulary vocab = Vocabulary::build(texts);

  const fs::path out = output_dir(ctx);
  json manifest{{"domain", domain_name(domain)},
                {"seed", seed},
                {"per_dialogue", per_dialogue},
                {"vocab_file", kVocabFile},
                {"vocab_hash", hash_hex(vocab.hash())},
                {"vocab_size", vocab.size()}};
  std::vector<std::vector<std::string>> rows;
  for (const CorpusSplit* s : {&splits.train, &splits.validation, &splits.test}) {
    const PairDataset ds = build_pair_dataset(s->dialogues, domain, per_dialogue, seed);
    write_pairs(out / (s->name + ".jsonl"), ds.pairs);
    manifest["splits"][s->name] = {{"dialogues", ds.dialogues},
                                   {"perturbations", ds.perturbations},
                                   {"pairs", ds.pairs.size()},
                                   {"skipped", ds.skipped.size()},
                                   {"skipped_ids", ds.skipped}};
    rows.push_back({s->name, std::to_string(ds.dialogues), std::to_string(ds.skipped.size()),
                    std::to_string(ds.perturbations), std::to_string(ds.pairs.size())});
  }
  vocab.save(out / kVocabFile);
  write_text(out / kManifest, manifest.dump(2) + "\n");
  c.write(out / kResolvedConfig, {"corpus", "domain", "seed", "per_dialogue", "out", "data_root"});
  ctx.out << render_table({"split", "dialogues", "skipped", "perturbations", "pairs"}, rows)
          << "pairs written to " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ train

struct PairDir {
  Vocabulary vocab;
  std::string vocab_hash;
  std::vector<DialoguePair> train, validation, test;
};

std::string manifest_vocab_hash(const fs::path& dir) {
  const fs::path m = dir / kManifest;
  if (!fs::is_regular_file(m)) return {};
  const json j = read_json(m);
  return j.value("vocab_hash", "");
}

PairDir load_pair_dir(const fs::path& dir) {
  PairDir p;
  if (!fs::is_regular_file(dir / kVocabFile)) throw UsageError("no " + std::string(kVocabFile) + " in " + dir.string());
  p.vocab = Vocabulary::load(dir / kVocabFile);
  p.vocab_hash = hash_hex(p.vocab.hash());
  const std::string recorded = manifest_vocab_hash(dir);
  if (!recorded.empty() && recorded != p.vocab_hash) {
    throw CompatibilityError(dir.string() + ": vocabulary does not match the manifest hash");
  }
  p.train = read_pairs(dir / "train.jsonl");
  p.validation = read_pairs(dir / "validation.jsonl");
  if (fs::is_regular_file(dir / "test.jsonl")) p.test = read_pairs(dir / "test.jsonl");
  if (p.train.empty()) throw UsageError(dir.string() + ": train.jsonl holds no pairs");
  if (p.validation.empty()) throw UsageError(dir.string() + ": validation.jsonl holds no pairs");
  return p;
}

TrainConfig train_config(const RunConfig& c, std::uint64_t seed) {
  TrainConfig t;
  t.regime = parse_regime(c.str("regime"));
  t.epochs = c.size("epochs");
  t.batch_size = c.size("batch_size");
  t.learning_rate = c.real("lr");
  t.dropout = c.real("dropout");
  t.seed = seed;
  t.n_max = c.size("n_max");
  t.embed_dim = c.size("embed_dim");
  t.utt_hidden = c.size("utt_hidden");
  t.dial_hidden = c.size("dial_hidden");
  t.trainable_embeddings = c.flag("trainable_embeddings");
  t.dap_after_dropout = c.flag("dap_after_dropout");
  t.validate();
  return t;
}

std::string model_label(Regime r) {
  switch (r) {
    case Regime::SDiCoh: return "S-DiCoh";
    case Regime::MDiCoh: return "M-DiCoh";
    case Regime::SDap: return "S-DAP";
    case Regime::MDap: return "M-DAP";
  }
  return "?";
}

struct TestMetrics {
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
};

TestMetrics evaluate_pairs(CoherenceModel& model, const Vocabulary& vocab, const TrainConfig& config,
                           const std::vector<DialoguePair>& pairs) {
  TestMetrics m;
  DialogueEncoder encoder(vocab, config.n_max);
  if (is_dap_regime(config.regime)) {
    m.macro_f1 = evaluate_dap(model, encoder, original_dialogues(pairs)).macro_f1;
  } else {
    m.accuracy = pairwise_accuracy(score_pairs(model, encoder, pairs)).accuracy;
  }
  return m;
}

int cmd_train(Context& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path pairs_dir = resolve_input(c, c.str("pairs"));
  if (!c.has("embeddings")) throw UsageError("--embeddings is required (a vector file, or 'random')");
  const std::string embeddings = c.str("embeddings");
  const fs::path embeddings_path = embeddings == "random" ? fs::path() : resolve_input(c, embeddings);
  const std::size_t seeds = c.size("seeds");
  if (seeds == 0) throw ConfigError("seeds must be positive");
  const std::uint64_t first_seed = c.u64("seed");
  (void)train_config(c, first_seed);

  const PairDir data = load_pair_dir(pairs_dir);
  const fs::path out = output_dir(ctx);
  c.write(out / kResolvedConfig,
          {"pairs", "regime", "epochs", "batch_size", "lr", "dropout", "seed", "seeds", "n_max", "embed_dim",
           "utt_hidden", "dial_hidden", "trainable_embeddings", "dap_after_dropout", "embeddings", "out",
           "data_root"});

  std::vector<double> test_values;
  std::string metric_name;
  for (std::size_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = first_seed + k;
    const TrainConfig tc = train_config(c, seed);
    const fs::path run_dir = seeds == 1 ? out : out / ("seed-" + std::to_string(seed));
    fs::create_directories(run_dir);

    std::optional<Tensor> matrix;
    double coverage = 0.0;
    if (!embeddings_path.empty()) {
      SeededRng rng(mix_seed(seed, 0xe3b));
      EmbeddingMatrix m = load_pretrained(embeddings_path, data.vocab, rng, tc.embed_dim);
      coverage = m.coverage;
      matrix = std::move(m.matrix);
    }
    CoherenceModel model(tc.model_config(data.vocab.size()), std::move(matrix));
    ctx.err << "seed " << seed << ": " << model.params().scalar_count() << " parameters, "
            << data.train.size() << " train pairs, " << data.validation.size() << " validation pairs";
    if (!embeddings_path.empty()) ctx.err << ", embedding coverage " << two(coverage * 100) << "%";
    ctx.err << "\n";

    std::ofstream log(run_dir / "train.log", std::ios::trunc);
    const auto start = std::chrono::steady_clock::now();
    TrainResult result = train(tc, data.train, data.validation, model, data.vocab, [&](const EpochLog& e) {
      const std::string line = format_epoch_log(e);
      log << line << "\n" << std::flush;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ctx.err << line << " elapsed=" << two(secs) << "s\n";
    });
    write_checkpoint(run_dir / kModelFile, result.best);

    json summary{{"seed", seed},
                 {"regime", regime_name(tc.regime)},
                 {"best_epoch", result.best_epoch},
                 {"best_validation_metric", result.best_metric},
                 {"vocab_hash", data.vocab_hash},
                 {"embedding_coverage", coverage}};
    json epochs = json::array();
    for (const auto& e : result.epochs) {
      json je{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"gamma1", e.gamma1}, {"gamma2", e.gamma2}};
      if (e.val_accuracy) je["val_accuracy"] = *e.val_accuracy;
      if (e.val_macro_f1) je["val_macro_f1"] = *e.val_macro_f1;
      epochs.push_back(je);
    }
    summary["epochs"] = epochs;
    if (!data.test.empty()) {
      LoadedModel best = load_model(result.best);
      const TestMetrics m = evaluate_pairs(*best.model, best.vocab, best.config, data.test);
      if (m.accuracy) {
        summary["test_accuracy"] = *m.accuracy;
        test_values.push_back(*m.accuracy);
        metric_name = "test accuracy";
      }
      if (m.macro_f1) {
        summary["test_macro_f1"] = *m.macro_f1;
        test_values.push_back(*m.macro_f1);
        metric_name = "test macro-F1";
      }
      ctx.out << "seed " << seed << ": best epoch " << result.best_epoch << ", " << metric_name << " "
              << format_percent(test_values.back()) << "\n";
    } else {
      ctx.out << "seed " << seed << ": best epoch " << result.best_epoch << ", validation metric "
              << format_percent(result.best_metric) << "\n";
    }
    write_text(run_dir / "result.json", summary.dump(2) + "\n");
  }

  if (test_values.size() >= 2) {
    const RunSummary s = summarize_runs(test_values);
    const std::string line = model_label(parse_regime(c.str("regime"))) + " " + metric_name + ": " +
                             format_mean_std(s) + " over " + std::to_string(s.runs) + " seeds";
    write_text(out / "summary.txt", line + "\n");
    write_text(out / "summary.json",
               json{{"metric", metric_name}, {"values", test_values}, {"mean", s.mean}, {"std", s.std}}.dump(2) + "\n");
    ctx.out << line << "\n";
  }
  ctx.out << "outputs written to " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- eval

struct EvalInput {
  fs::path path;
  std::string domain;
  std::vector<DialoguePair> pairs;
};

std::vector<EvalInput> eval_inputs(const RunConfig& c) {
  std::vector<EvalInput> inputs;
  for (const auto& item : split_list(c.str("pairs"))) {
    fs::path p = resolve_input(c, item);
    if (fs::is_directory(p)) p /= c.str("split") + ".jsonl";
    if (!fs::is_regular_file(p)) throw UsageError("no such pair file: " + p.string());
    EvalInput in;
    in.path = p;
    in.pairs = read_pairs(p);
    if (in.pairs.empty()) throw UsageError("pair file " + p.string() + " is empty");
    in.domain = domain_name(in.pairs.front().domain);
    inputs.push_back(std::move(in));
  }
  if (inputs.empty()) throw UsageError("--pairs names no pair files");
  return inputs;
}

int cmd_eval(Context& ctx) {
  const RunConfig& c = ctx.config;
  const std::vector<EvalInput> inputs = eval_inputs(c);
  const std::string kind = c.str("model");

  // One value per (instance, input).
  std::vector<std::vector<double>> values;
  std::string row_label;
  std::string metric = "accuracy";
  if (kind == "dicoh") {
    if (!c.has("checkpoint")) throw UsageError("--checkpoint is required to evaluate a trained model");
    for (const auto& item : split_list(c.str("checkpoint"))) {
      LoadedModel m = load_model(resolve_input(c, item));
      const std::string& hash = m.metadata.at("vocab_hash");
      for (const auto& in : inputs) {
        const std::string recorded = manifest_vocab_hash(in.path.parent_path());
        if (!recorded.empty() && recorded != hash) {
          throw CompatibilityError(in.path.string() + " was built with vocabulary " + recorded +
                                   " but the checkpoint uses " + hash);
        }
      }
      row_label = model_label(m.config.regime);
      if (is_dap_regime(m.config.regime)) metric = "macro_f1";
      std::vector<double> row;
      for (const auto& in : inputs) {
        const TestMetrics t = evaluate_pairs(*m.model, m.vocab, m.config, in.pairs);
        row.push_back(t.accuracy ? *t.accuracy : *t.macro_f1);
      }
      values.push_back(std::move(row));
    }
  } else if (kind == "random") {
    row_label = "Random";
    for (std::size_t k = 0; k < c.size("seeds"); ++k) {
      std::vector<double> row;
      for (const auto& in : inputs) {
        SeededRng rng(mix_seed(c.u64("seed") + k, hash_string(in.path.filename().string())));
        std::vector<ScoredPair> scored;
        for (const auto& p : in.pairs) {
          const int predicted = random_rank(rng);
          scored.push_back({predicted == 0 ? 1.0 : 0.0, predicted == 0 ? 0.0 : 1.0, p.label});
        }
        row.push_back(pairwise_accuracy(scored).accuracy);
      }
      values.push_back(std::move(row));
    }
  } else if (kind == "cosim") {
    row_label = "CoSim";
    if (!c.has("embeddings")) throw UsageError("--embeddings is required for the cosim baseline");
    const PretrainedVectors vectors = PretrainedVectors::load(resolve_input(c, c.str("embeddings")), c.size("embed_dim"));
    const StopwordList stopwords =
        c.has("stopwords") ? StopwordList::load(resolve_input(c, c.str("stopwords"))) : StopwordList::smart();
    std::vector<double> row;
    for (const auto& in : inputs) {
      std::unordered_map<const Dialogue*, double> cache;
      auto score = [&](const PairSide& s) {
        auto it = cache.find(s.dialogue.get());
        if (it == cache.end()) it = cache.emplace(s.dialogue.get(), cosim_score(*s.dialogue, vectors, stopwords)).first;
        return it->second;
      };
      std::vector<ScoredPair> scored;
      for (const auto& p : in.pairs) scored.push_back({score(p.a), score(p.b), p.label});
      row.push_back(pairwise_accuracy(scored).accuracy);
    }
    values.push_back(std::move(row));
  } else {
    throw UsageError("unknown --model '" + kind + "' (expected dicoh, random or cosim)");
  }

  std::vector<std::string> header{"model"};
  std::vector<std::string> cells{row_label};
  json report{{"model", row_label}, {"metric", metric}, {"instances", values.size()}};
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<double> column;
    for (const auto& row : values) column.push_back(row[i]);
    header.push_back(inputs[i].domain);
    json cell{{"domain", inputs[i].domain}, {"file", inputs[i].path.string()}, {"pairs", inputs[i].pairs.size()},
              {"values", column}};
    if (column.size() >= 2) {
      const RunSummary s = summarize_runs(column);
      cells.push_back(format_mean_std(s));
      cell["mean"] = s.mean;
      cell["std"] = s.std;
    } else {
      cells.push_back(format_percent(column.front()));
      cell["mean"] = column.front();
    }
    report["cells"].push_back(cell);
  }
  const std::string table = render_table(header, {cells});
  const fs::path out = output_dir(ctx);
  write_text(out / "report.json", report.dump(2) + "\n");
  write_text(out / "report.txt", table);
  c.write(out / kResolvedConfig,
          {"checkpoint", "pairs", "split", "model", "seed", "seeds", "embeddings", "embed_dim", "stopwords", "out",
           "data_root"});
  ctx.out << table;
  return 0;
}

// ------------------------------------------------------------ score, inspect

std::vector<Dialogue> read_dialogues_any(const fs::path& path) {
  try {
    return read_canonical(path);
  } catch (const ParseError&) {
  }
  std::vector<Dialogue> out;
  std::set<std::string> seen;
  for (const auto& p : read_pairs(path)) {
    for (const PairSide* s : {&p.a, &p.b}) {
      if (seen.insert(s->dialogue->id).second) out.push_back(*s->dialogue);
    }
  }
  return out;
}

int cmd_score(Context& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.has("checkpoint")) throw UsageError("--checkpoint is required");
  LoadedModel m = load_model(resolve_input(c, c.str("checkpoint")));
  const std::vector<Dialogue> dialogues = read_dialogues_any(resolve_input(c, c.str("input")));
  if (dialogues.empty()) throw UsageError("no dialogues to score");
  DialogueEncoder encoder(m.vocab, m.config.n_max);
  std::vector<std::vector<EncodedUtterance>> encoded;
  for (const auto& d : dialogues) encoded.push_back(encoder.encode(d));
  const std::vector<double> scores = score_dialogues(*m.model, encoded);
  std::ostringstream tsv;
  tsv << std::setprecision(17);
  for (std::size_t i = 0; i < dialogues.size(); ++i) tsv << dialogues[i].id << '\t' << scores[i] << '\n';
  const fs::path out = output_dir(ctx);
  write_text(out / "scores.tsv", tsv.str());
  c.write(out / kResolvedConfig, {"checkpoint", "input", "seed", "out", "data_root"});
  ctx.out << tsv.str();
  return 0;
}

int cmd_inspect(Context& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.has("checkpoint")) throw UsageError("--checkpoint is required");
  LoadedModel m = load_model(resolve_input(c, c.str("checkpoint")));
  const std::vector<Dialogue> dialogues = read_dialogues_any(resolve_input(c, c.str("input")));
  const Dialogue* target = nullptr;
  if (c.has("dialogue")) {
    for (const auto& d : dialogues) {
      if (d.id == c.str("dialogue")) target = &d;
    }
    if (!target) throw UsageError("unknown dialogue id '" + c.str("dialogue") + "'");
  } else if (dialogues.size() == 1) {
    target = &dialogues.front();
  } else {
    throw UsageError("--dialogue is required when the input holds several dialogues");
  }

  DialogueEncoder encoder(m.vocab, m.config.n_max);
  Tape tape;
  SeededRng unused(0);
  const DialogueScore s = score_dialogue(tape, *m.model, encoder.encode(*target), false, unused);
  std::ostringstream records, view;
  view << "dialogue " << target->id << "  score " << std::setprecision(6) << s.score.value().item() << "\n";
  for (std::size_t k = 0; k < target->size(); ++k) {
    std::vector<std::string> tokens = tokenize(target->utterances[k]);
    tokens.resize(std::min(tokens.size(), m.config.n_max));
    json r{{"dialogue", target->id},
           {"utterance", k},
           {"speaker", target->speakers[k]},
           {"dialogue_weight", s.utterance_attention[k]},
           {"tokens", tokens},
           {"word_weights", s.word_attention[k]}};
    records << r.dump(-1, ' ', false, json::error_handler_t::replace) << "\n";
    view << "[" << std::fixed << std::setprecision(3) << s.utterance_attention[k] << "] ";
    for (std::size_t t = 0; t < tokens.size(); ++t) view << tokens[t] << "(" << s.word_attention[k][t] << ") ";
    view << "\n";
  }
  const fs::path out = output_dir(ctx);
  write_text(out / "attention.jsonl", records.str());
  write_text(out / "attention.txt", view.str());
  c.write(out / kResolvedConfig, {"checkpoint", "input", "dialogue", "seed", "out", "data_root"});
  ctx.out << view.str();
  return 0;
}

// ---------------------------------------------------------------- dispatch

struct Option {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<Option> kCommon = {
    {"--seed", "seed", "Random seed"},
    {"--out", "out", "Output directory (default: <data root>/runs/<command>-<time>-s<seed>)"},
    {"--data-root", "data_root", "Data root (default: $DICOH_DATA_ROOT or the working directory)"},
};

const std::map<std::string, std::vector<Option>> kCommandOptions = {
    {"prepare",
     {{"--input", "input", "DailyDialog directory or dialogue text file"},
      {"--acts", "acts", "Dialogue act file when --input is a file"},
      {"--max-dialogues", "max_dialogues", "Keep at most this many dialogues"}}},
    {"perturb",
     {{"--corpus", "corpus", "Canonical corpus directory"},
      {"--domain", "domain", "Problem domain: uo, ui, ur or euo"},
      {"--per-dialogue", "per_dialogue", "Perturbations per dialogue"}}},
    {"train",
     {{"--pairs", "pairs", "Pair dataset directory"},
      {"--regime", "regime", "s-dicoh, m-dicoh, s-dap or m-dap"},
      {"--epochs", "epochs", "Training epochs"},
      {"--batch-size", "batch_size", "Dialogue pairs per batch"},
      {"--lr", "lr", "Adam learning rate"},
      {"--embeddings", "embeddings", "Pretrained vector file, or 'random'"},
      {"--seeds", "seeds", "Number of consecutive seeds to train"},
      {"--dropout", "dropout", "Dropout on utterance vectors"},
      {"--n-max", "n_max", "Maximum tokens per utterance"},
      {"--embed-dim", "embed_dim", "Embedding width"},
      {"--utt-hidden", "utt_hidden", "Utterance LSTM hidden size"},
      {"--dial-hidden", "dial_hidden", "Dialogue LSTM hidden size"},
      {"--trainable-embeddings", "trainable_embeddings", "Fine-tune embeddings (true/false)"},
      {"--dap-after-dropout", "dap_after_dropout", "Feed dropped-out vectors to the DAP head (true/false)"}}},
    {"eval",
     {{"--checkpoint", "checkpoint", "Model checkpoint(s), comma separated"},
      {"--pairs", "pairs", "Pair files or dataset directories, comma separated"},
      {"--split", "split", "Split read from dataset directories"},
      {"--model", "model", "dicoh, random or cosim"},
      {"--seeds", "seeds", "Seeds for the random baseline"},
      {"--embeddings", "embeddings", "Vector file for the cosim baseline"},
      {"--embed-dim", "embed_dim", "Width of the vector file"},
      {"--stopwords", "stopwords", "Stopword list (default: bundled SMART list)"}}},
    {"score",
     {{"--checkpoint", "checkpoint", "Model checkpoint"},
      {"--input", "input", "Canonical corpus file or pair file"}}},
    {"inspect",
     {{"--checkpoint", "checkpoint", "Model checkpoint"},
      {"--input", "input", "Canonical corpus file or pair file"},
      {"--dialogue", "dialogue", "Dialogue id"}}},
};

const std::map<std::string, const char*> kDescriptions = {
    {"prepare", "Convert raw DailyDialog files into canonical train/validation/test splits"},
    {"perturb", "Build pair datasets for one problem domain"},
    {"train", "Train a coherence model on a pair dataset"},
    {"eval", "Evaluate checkpoints or baselines on pair files"},
    {"score", "Score dialogues with a trained model"},
    {"inspect", "Dump word and utterance attention weights for one dialogue"},
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dialogue coherence modelling toolkit", "dicoh"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string config_file;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, options] : kCommandOptions) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--config", config_file, "key = value configuration file");
    for (const auto* group : {&kCommon, &options}) {
      for (const Option& o : *group) {
        const std::string key = o.key;
        sub->add_option_function<std::string>(o.flag, [&flags, key](const std::string& v) { flags[key] = v; }, o.help);
      }
    }
    subs[name] = sub;
  }

  std::vector<std::string> owned{"dicoh"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  try {
    Context ctx{RunConfig::defaults(), command, out, err};
    if (!config_file.empty()) ctx.config.merge_file(config_file);
    for (const auto& [k, v] : flags) ctx.config.set(k, v);
    if (command == "prepare") {
      if (!ctx.config.has("input")) throw UsageError("--input is required");
      return cmd_prepare(ctx);
    }
    if (command == "perturb") {
      if (!ctx.config.has("corpus")) throw UsageError("--corpus is required");
      return cmd_perturb(ctx);
    }
    if (command == "train") {
      if (!ctx.config.has("pairs")) throw UsageError("--pairs is required");
      return cmd_train(ctx);
    }
    if (command == "eval") {
      if (!ctx.config.has("pairs")) throw UsageError("--pairs is required");
      return cmd_eval(ctx);
    }
    if (!ctx.config.has("input")) throw UsageError("--input is required");
    if (command == "score") return cmd_score(ctx);
    return cmd_inspect(ctx);
  } catch (const UsageError& e) {
    err << "dicoh " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "dicoh " << command << ": configuration error: " << e.what() << "\n";
    return 2;
  } catch (const CompatibilityError& e) {
    err << "dicoh " << command << ": incompatible inputs: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "dicoh " << command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dicoh::cli
