// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "dicoh/corpus.hpp"
#include "dicoh/losses.hpp"
#include "dicoh/metrics.hpp"
#include "dicoh/model.hpp"
#include "dicoh/pair_dataset.hpp"
#include "dicoh/synthetic.hpp"
#include "dicoh/trainer.hpp"
#include "gradcheck.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dicoh;
using dicoh::testing::check_inputs;
using dicoh::testing::check_parameters;
using dicoh::testing::GradCheck;
using dicoh::testing::random_tensor;

constexpr std::size_t kGradInstances = 20;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Runs the CLI in-process; throws with its stderr on a non-zero exit.
std::string cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (code != 0) {
    std::string line;
    for (const auto& a : args) line += a + " ";
    throw std::runtime_error("dicoh " + line + "exited " + std::to_string(code) + ": " + err.str());
  }
  return out.str();
}

// ------------------------------------------------------------ gradients

Var weighted_sum(const Var& x, std::uint64_t seed) {
  SeededRng rng(seed);
  return ops::sum(ops::mul_const(x, random_tensor(x.value().shape(), rng)));
}

ModelConfig tiny_model(std::uint64_t seed) {
  ModelConfig c;
  c.vocab_size = 6;
  c.embed_dim = 3;
  c.utt_hidden = 2;
  c.dial_hidden = 2;
  c.init_seed = seed;
  return c;
}

EncodedUtterance utt(std::vector<std::size_t> ids, std::size_t n_max = 5) {
  EncodedUtterance u;
  u.length = ids.size();
  u.ids = ids;
  u.ids.resize(n_max, Vocabulary::kPad);
  u.mask.assign(n_max, false);
  std::fill(u.mask.begin(), u.mask.begin() + static_cast<std::ptrdiff_t>(ids.size()), true);
  return u;
}

DialogueBatch tiny_batch() {
  DialogueBatch b;
  b.add_dialogue({utt({2, 3}), utt({4, 5, 2}), utt({3})});
  b.add_dialogue({utt({3}), utt({5, 4}), utt({2, 3})});
  return b;
}

Outcome criterion_gradients() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, GradCheck> worst;
  auto track = [&](const std::string& name, const GradCheck& r) {
    GradCheck& w = worst[name];
    w.checked += r.checked;
    if (r.max_rel_error >= w.max_rel_error) {
      w.max_rel_error = r.max_rel_error;
      w.worst = r.worst;
    }
  };

  for (std::size_t s = 0; s < kGradInstances; ++s) {
    SeededRng rng(1000 + s);
    {
      ParameterStore store;
      LstmCellParams p = LstmCellParams::create(store, "cell", 3, 2, rng);
      const Tensor x = random_tensor({2, 3}, rng), h0 = random_tensor({2, 2}, rng), c0 = random_tensor({2, 2}, rng);
      auto loss = [&](Tape& tape, const Var& xv, const Var& hv, const Var& cv) {
        LstmState st = lstm_step(bind(tape, p), xv, hv, cv);
        return ops::add(weighted_sum(st.h, s), weighted_sum(st.c, s + 1));
      };
      track("lstm", check_parameters(store, [&](Tape& t) {
              return loss(t, t.constant(x), t.constant(h0), t.constant(c0));
            }));
      track("lstm", check_inputs({x, h0, c0}, [&](Tape& t, const std::vector<Var>& v) { return loss(t, v[0], v[1], v[2]); }));
    }
    {
      ParameterStore store;
      LstmCellParams f = LstmCellParams::create(store, "f", 2, 2, rng);
      LstmCellParams b = LstmCellParams::create(store, "b", 2, 2, rng);
      PackedLayout layout({3, 1, 2});
      const Tensor x = random_tensor({layout.total(), 2}, rng);
      auto loss = [&](Tape& t, const Var& xs) {
        LstmCellVars fv = bind(t, f), bv = bind(t, b);
        return weighted_sum(bilstm_packed(fv, project_inputs(fv, xs), bv, project_inputs(bv, xs), layout), s);
      };
      track("bilstm", check_parameters(store, [&](Tape& t) { return loss(t, t.constant(x)); }));
      track("bilstm", check_inputs({x}, [&](Tape& t, const std::vector<Var>& v) { return loss(t, v[0]); }));
      const std::vector<bool> mask{true, true, false};
      const Tensor padded = random_tensor({3, 2}, rng);
      track("bilstm", check_parameters(store, [&](Tape& t) {
              return weighted_sum(bilstm(bind(t, f), bind(t, b), t.constant(padded), mask), s);
            }));
    }
    {
      PackedLayout layout({2, 3});
      track("attention", check_inputs({random_tensor({3}, rng), random_tensor({4, 3}, rng)},
                                      [&](Tape&, const std::vector<Var>& v) {
                                        return weighted_sum(attention(v[0], v[1], {true, true, true, false}).output, s);
                                      }));
      track("attention", check_inputs({random_tensor({3}, rng), random_tensor({layout.total(), 3}, rng)},
                                      [&](Tape&, const std::vector<Var>& v) {
                                        return weighted_sum(attention_packed(v[0], v[1], layout).output, s);
                                      }));
    }
    track("dropout", check_inputs({random_tensor({4, 5}, rng)}, [&](Tape&, const std::vector<Var>& v) {
            SeededRng mask_rng(s);
            return weighted_sum(dropout(v[0], 0.3, true, mask_rng), s);
          }));
    track("softmax", check_inputs({random_tensor({3, 4}, rng, 2.0)}, [&](Tape&, const std::vector<Var>& v) {
            return ops::add(weighted_sum(ops::softmax_rows(v[0]), s), weighted_sum(ops::log_softmax_rows(v[0]), s + 1));
          }));
    {
      CoherenceModel model(tiny_model(2000 + s));
      const Tensor u = random_tensor({3, 4}, rng);
      track("dap_head", check_parameters(model.params(), [&](Tape& t) {
              return weighted_sum(predict_dialogue_acts(t, model.dap_head(), t.constant(u)), s);
            }));
    }

    // Whole-model loss paths: coherence hinge, DAP cross-entropy, and the
    // balanced total including eta.
    const DialogueBatch batch = tiny_batch();
    const std::vector<int> gold{0, 1, 3, 2, 2, 0};
    const bool training = s % 2 == 0;
    auto path = [&](const std::string& name, const std::function<Var(Tape&, CoherenceModel&, const BatchForward&)>& f) {
      ModelConfig c = tiny_model(3000 + s);
      c.dap_after_dropout = s % 4 < 2;
      CoherenceModel model(c);
      track(name, check_parameters(model.params(), [&](Tape& t) {
              SeededRng r(s);
              return f(t, model, forward(t, model, batch, training, r));
            }));
    };
    path("coherence_loss", [&](Tape&, CoherenceModel&, const BatchForward& fw) {
      return ops::mean(pair_hinge_losses(fw.scores, {s % 2}, {1 - s % 2}));
    });
    path("dap_loss", [&](Tape&, CoherenceModel&, const BatchForward& fw) {
      return ops::mean(segment_dap_losses(fw.dap_log_probs, gold, fw.slot_offsets));
    });
    path("total_loss", [&](Tape& t, CoherenceModel& m, const BatchForward& fw) {
      Var hinge = ops::mean(pair_hinge_losses(fw.scores, {0}, {1}));
      Var dap = segment_dap_losses(fw.dap_log_probs, gold, fw.slot_offsets);
      return total_loss(hinge, ops::slice_rows(dap, 0, 1), ops::slice_rows(dap, 1, 2),
                        t.parameter(*m.balance().eta1), t.parameter(*m.balance().eta2));
    });
    std::vector<Tensor> scalars;
    for (int k = 0; k < 3; ++k) scalars.push_back(Tensor::scalar(rng.uniform(0, 2)));
    for (int k = 0; k < 2; ++k) scalars.push_back(Tensor::scalar(rng.uniform(-1, 1)));
    track("total_loss", check_inputs(scalars, [](Tape&, const std::vector<Var>& v) {
            return total_loss(v[0], v[1], v[2], v[3], v[4]);
          }));
  }

  double max_rel = 0;
  for (const auto& [name, r] : worst) {
    o.require(r.ok(), name + " rel " + fixed(r.max_rel_error, 8) + " at " + r.worst);
    max_rel = std::max(max_rel, r.max_rel_error);
  }
  const double secs = seconds_since(start);
  o.require(secs < 60.0, "runtime " + fixed(secs, 1) + "s");
  o.note(std::to_string(worst.size()) + " groups x " + std::to_string(kGradInstances) + " instances, max rel " +
         fixed(max_rel, 8) + ", " + fixed(secs, 1) + "s");
  return o;
}

// ---------------------------------------------------------- loss algebra

Outcome criterion_loss_algebra() {
  Outcome o;
  SeededRng rng(77);
  std::size_t symmetry = 0, negative = 0, eta = 0;
  for (int k = 0; k < 1000; ++k) {
    const double si = rng.uniform(-3, 3), sj = rng.uniform(-3, 3);
    const int label = static_cast<int>(rng.index(2));
    symmetry += coherence_loss(si, sj, label) != coherence_loss(sj, si, 1 - label);
    negative += coherence_loss(si, sj, label) < 0.0;

    const double l = rng.uniform(0, 3), a = rng.uniform(0, 3), b = rng.uniform(0, 3);
    const double e1 = rng.uniform(-2, 2), e2 = rng.uniform(-2, 2);
    Tape tape;
    Var eta1 = tape.variable(Tensor::scalar(e1));
    Var eta2 = tape.variable(Tensor::scalar(e2));
    Var t = total_loss(tape.constant(Tensor::scalar(l)), tape.constant(Tensor::scalar(a)),
                       tape.constant(Tensor::scalar(b)), eta1, eta2);
    tape.backward(t);
    const double g1 = std::exp(e1), g2 = std::exp(e2);
    const double want1 = 1 - 2 * l / (g1 * g1), want2 = 1 - 2 * (a + b) / (g2 * g2);
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); };
    eta += !close(eta1.grad()[0], want1) || !close(eta2.grad()[0], want2) ||
           !close(t.value()[0], total_loss(l, a, b, e1, e2));
  }
  o.require(symmetry == 0, std::to_string(symmetry) + " symmetry violations");
  o.require(negative == 0, std::to_string(negative) + " negative losses");
  o.require(eta == 0, std::to_string(eta) + " eta-gradient mismatches");
  o.note("1000 instances");
  return o;
}

// --------------------------------------------------------- perturbations

std::multiset<std::string> texts(const Dialogue& d) { return {d.utterances.begin(), d.utterances.end()}; }

std::vector<Dialogue> synthetic_dialogues(std::size_t n, std::uint64_t seed) {
  SyntheticCorpusOptions opt;
  opt.dialogues = n;
  opt.seed = seed;
  const SyntheticCorpus raw = synthetic_dailydialog(opt);
  return parse_dailydialog_text(raw.text, raw.acts, "syn").dialogues;
}

Outcome criterion_perturbations() {
  Outcome o;
  const std::vector<Dialogue> corpus = synthetic_dialogues(500, 31);
  std::size_t total = 0;
  for (Domain domain : kAllDomains) {
    const std::string name = domain_name(domain);
    std::map<std::string, std::size_t> bad;
    for (const Dialogue& d : corpus) {
      SeededRng rng(dialogue_seed(5, d.id, domain));
      const auto specs = distinct_perturbations(domain, d, corpus, kPerturbationsPerDialogue, rng);
      std::set<std::vector<std::string>> seen;
      for (const auto& s : specs) {
        ++total;
        const Dialogue p = apply_perturbation(s, d);
        bad["identity"] += p.utterances == d.utterances;
        bad["duplicate"] += !seen.insert(p.utterances).second;
        bad["replay"] += apply_perturbation(s, d) != p;
        bad["length"] += p.size() != d.size();
        std::size_t differing = 0;
        for (std::size_t k = 0; k < d.size() && k < p.size(); ++k) differing += p.utterances[k] != d.utterances[k];
        switch (domain) {
          case Domain::UO:
            bad["multiset"] += texts(p) != texts(d);
            break;
          case Domain::UI: {
            bad["multiset"] += texts(p) != texts(d);
            std::vector<std::string> a = d.utterances, b = p.utterances;
            a.erase(a.begin() + static_cast<std::ptrdiff_t>(s.removed_index));
            b.erase(b.begin() + static_cast<std::ptrdiff_t>(s.reinsert_index));
            bad["single-slot"] += a != b;
            break;
          }
          case Domain::UR:
            bad["single-slot"] += differing != 1;
            bad["speakers"] += p.speakers != d.speakers;
            break;
          case Domain::EUO:
            bad["multiset"] += texts(p) != texts(d);
            bad["speakers"] += p.speakers != d.speakers;
            for (std::size_t k = 0; k < d.size(); ++k) {
              if (d.speakers[k] != s.speaker) bad["fixed-speaker"] += p.utterances[k] != d.utterances[k];
            }
            break;
        }
      }
      SeededRng again(dialogue_seed(5, d.id, domain));
      bad["replay"] += distinct_perturbations(domain, d, corpus, kPerturbationsPerDialogue, again) != specs;
    }
    const PairDataset a = build_pair_dataset(corpus, domain, kPerturbationsPerDialogue, 5);
    const PairDataset b = build_pair_dataset(corpus, domain, kPerturbationsPerDialogue, 5);
    std::size_t ones = 0;
    for (const auto& p : a.pairs) ones += static_cast<std::size_t>(p.label);
    bad["balance"] += 2 * ones != a.pairs.size() || a.pairs.size() != 2 * a.perturbations;
    bad["replay"] += a.pairs.size() != b.pairs.size();
    for (std::size_t i = 0; i < std::min(a.pairs.size(), b.pairs.size()); ++i) {
      bad["replay"] += a.pairs[i].pair_id != b.pairs[i].pair_id || *a.pairs[i].a.dialogue != *b.pairs[i].a.dialogue ||
                       *a.pairs[i].b.dialogue != *b.pairs[i].b.dialogue;
    }
    for (const auto& [what, n] : bad) o.require(n == 0, name + " " + what + " x" + std::to_string(n));
    o.note(name + " " + std::to_string(a.pairs.size()) + " pairs");
  }
  o.note(std::to_string(total) + " perturbations checked");
  return o;
}

// --------------------------------------------------------------- metrics

double brute_macro_f1(const std::vector<int>& pred, const std::vector<int>& gold, int labels) {
  double sum = 0;
  int present = 0;
  for (int k = 0; k < labels; ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += pred[i] == k && gold[i] == k;
      fp += pred[i] == k && gold[i] != k;
      fn += pred[i] != k && gold[i] == k;
    }
    if (tp + fp + fn == 0) continue;
    ++present;
    sum += 2 * tp / (2 * tp + fp + fn);
  }
  return sum / present;
}

Outcome criterion_metrics(const fs::path& uo_pairs, const fs::path& work) {
  Outcome o;
  SeededRng rng(2024);
  std::size_t acc_bad = 0, f1_bad = 0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<ScoredPair> pairs(1 + rng.index(300));
    std::size_t correct = 0;
    for (auto& p : pairs) {
      p.s_a = static_cast<double>(rng.index(4));
      p.s_b = static_cast<double>(rng.index(4));
      p.label = static_cast<int>(rng.index(2));
      correct += p.label == 0 ? p.s_a > p.s_b : p.s_b > p.s_a;
    }
    acc_bad += std::abs(pairwise_accuracy(pairs).accuracy - static_cast<double>(correct) / pairs.size()) > 1e-12;

    const int labels = 2 + static_cast<int>(rng.index(4));
    std::vector<int> pred(1 + rng.index(200)), gold(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      gold[i] = static_cast<int>(rng.index(static_cast<std::size_t>(labels)));
      pred[i] = rng.bernoulli(0.4) ? gold[i] : static_cast<int>(rng.index(static_cast<std::size_t>(labels)));
    }
    f1_bad += std::abs(macro_f1(pred, gold, static_cast<std::size_t>(labels)).macro_f1 -
                       brute_macro_f1(pred, gold, labels)) > 1e-12;
  }
  o.require(acc_bad == 0, std::to_string(acc_bad) + " accuracy mismatches");
  o.require(f1_bad == 0, std::to_string(f1_bad) + " macro-F1 mismatches");

  const fs::path out = work / "random-train";
  cli({"eval", "--model", "random", "--seed", "1", "--pairs", (uo_pairs / "train.jsonl").string(), "--out",
       out.string()});
  const json cell = read_json(out / "report.json")["cells"][0];
  const std::size_t n = cell["pairs"];
  const double acc = cell["mean"];
  o.require(n >= 2000, "only " + std::to_string(n) + " pairs for the random baseline");
  o.require(acc >= 0.47 && acc <= 0.53, "random accuracy " + fixed(acc));
  o.note("random " + fixed(acc) + " on " + std::to_string(n) + " pairs");
  return o;
}

// ------------------------------------------------------------- training

struct Experiment {
  fs::path raw;
  fs::path corpus;
  fs::path uo;
  std::string embeddings;  // file path or "random"
  std::size_t embed_dim = 300;
};

// Writes a synthetic raw corpus and vectors, or points at a real one.
Experiment prepare_experiment(const fs::path& work, const std::string& name, std::size_t dialogues,
                              std::uint64_t seed, const std::string& real_corpus) {
  Experiment e;
  const fs::path dir = work / name;
  e.raw = dir / "raw";
  e.corpus = dir / "corpus";
  e.uo = dir / "uo";
  fs::create_directories(e.raw);
  if (real_corpus.empty()) {
    SyntheticCorpusOptions opt;
    opt.dialogues = dialogues;
    opt.seed = seed;
    const SyntheticCorpus raw = synthetic_dailydialog(opt);
    write(e.raw / "dialogues_text.txt", raw.text);
    write(e.raw / "dialogues_act.txt", raw.acts);
    write(e.raw / "vectors.txt", synthetic_embeddings(synthetic_lexicon(), e.embed_dim, seed));
    e.embeddings = (e.raw / "vectors.txt").string();
    cli({"prepare", "--input", e.raw.string(), "--seed", std::to_string(seed), "--out", e.corpus.string()});
  } else {
    const char* vectors = std::getenv("DICOH_EMBEDDINGS");
    e.embeddings = vectors && *vectors ? vectors : "random";
    cli({"prepare", "--input", real_corpus, "--max-dialogues", std::to_string(dialogues), "--seed",
         std::to_string(seed), "--out", e.corpus.string()});
  }
  cli({"perturb", "--corpus", e.corpus.string(), "--domain", "uo", "--per-dialogue", "20", "--seed",
       std::to_string(seed), "--out", e.uo.string()});
  return e;
}

std::vector<std::string> train_args(const Experiment& e, const std::string& regime, const fs::path& out) {
  return {"train",        "--pairs",      e.uo.string(), "--regime",     regime,
          "--epochs",     "5",            "--utt-hidden", "32",          "--dial-hidden",
          "64",           "--batch-size", "128",          "--lr",        "0.0005",
          "--embeddings", e.embeddings,   "--embed-dim",  std::to_string(e.embed_dim),
          "--seed",       "1",            "--out",        out.string()};
}

struct TrainRun {
  json result;
  std::string log;
  double seconds = 0;
};

TrainRun train_run(const Experiment& e, const std::string& regime, const fs::path& out) {
  TrainRun r;
  const auto start = std::chrono::steady_clock::now();
  cli(train_args(e, regime, out));
  r.seconds = seconds_since(start);
  r.result = read_json(out / "result.json");
  r.log = slurp(out / "train.log");
  return r;
}

double random_accuracy(const Experiment& e, const fs::path& out) {
  cli({"eval", "--model", "random", "--seed", "1", "--pairs", e.uo.string(), "--split", "test", "--out",
       out.string()});
  return read_json(out / "report.json")["cells"][0]["mean"];
}

struct TrainingOutcomes {
  Outcome trend, mtl, determinism;
};

TrainingOutcomes criteria_training(const Experiment& e, const fs::path& work) {
  TrainingOutcomes t;
  const TrainRun s1 = train_run(e, "s-dicoh", work / "s-dicoh-1");
  const TrainRun m1 = train_run(e, "m-dicoh", work / "m-dicoh-1");
  const double random = random_accuracy(e, work / "random-test");

  const double s_acc = s1.result["test_accuracy"];
  t.trend.require(s_acc >= 0.70, "S-DiCoh test accuracy " + fixed(s_acc));
  t.trend.require(s_acc - random >= 0.15, "margin over random " + fixed(s_acc - random));
  t.trend.require(s1.seconds < 1800, "runtime " + fixed(s1.seconds, 0) + "s");
  t.trend.note("S-DiCoh " + fixed(s_acc) + " vs random " + fixed(random) + ", " + fixed(s1.seconds, 0) + "s");

  const json& epochs = m1.result["epochs"];
  bool g1 = false, g2 = false;
  for (const auto& ep : epochs) {
    g1 = g1 || std::abs(ep["gamma1"].get<double>() - 2.0) > 1e-3;
    g2 = g2 || std::abs(ep["gamma2"].get<double>() - 2.0) > 1e-3;
  }
  const std::size_t best = m1.result["best_epoch"];
  const double dap_f1 = epochs[best - 1]["val_macro_f1"];
  std::vector<int> gold;
  for (const auto& d : read_corpus_dir(e.corpus).validation.dialogues) gold.insert(gold.end(), d.da_labels.begin(), d.da_labels.end());
  const double majority = majority_class_f1(gold, 4);
  const double m_acc = m1.result["test_accuracy"];
  const json& last = epochs.back();
  t.mtl.require(g1 && g2, "gammas did not move: " + fixed(last["gamma1"], 6) + ", " + fixed(last["gamma2"], 6));
  t.mtl.require(dap_f1 > majority, "DAP validation macro-F1 " + fixed(dap_f1) + " <= majority " + fixed(majority));
  t.mtl.require(m_acc >= s_acc - 0.05, "M-DiCoh " + fixed(m_acc) + " vs S-DiCoh " + fixed(s_acc));
  t.mtl.note("gamma " + fixed(last["gamma1"]) + "/" + fixed(last["gamma2"]) + ", DAP F1 " + fixed(dap_f1) +
             " vs majority " + fixed(majority) + ", M-DiCoh " + fixed(m_acc));

  const TrainRun s2 = train_run(e, "s-dicoh", work / "s-dicoh-2");
  const TrainRun m2 = train_run(e, "m-dicoh", work / "m-dicoh-2");
  t.determinism.require(s1.log == s2.log && !s1.log.empty(), "S-DiCoh epoch logs differ");
  t.determinism.require(m1.log == m2.log && !m1.log.empty(), "M-DiCoh epoch logs differ");
  t.determinism.require(s1.result == s2.result, "S-DiCoh results differ");
  t.determinism.require(m1.result == m2.result, "M-DiCoh results differ");
  for (const auto& [run, result] : {std::pair{work / "s-dicoh-1", s1.result}, std::pair{work / "m-dicoh-1", m1.result}}) {
    LoadedModel m = load_model(run / "model.ckpt");
    const auto validation = read_pairs(e.uo / "validation.jsonl");
    DialogueEncoder enc(m.vocab, m.config.n_max);
    const double acc = pairwise_accuracy(score_pairs(*m.model, enc, validation)).accuracy;
    const std::size_t be = result["best_epoch"];
    const double logged = result["epochs"][be - 1]["val_accuracy"];
    t.determinism.require(acc == logged, run.filename().string() + " reloaded validation accuracy " + fixed(acc, 17) +
                                             " vs " + fixed(logged, 17));
  }
  t.determinism.note("two runs each of S-DiCoh and M-DiCoh identical; checkpoints reproduce validation accuracy");
  return t;
}

// ---------------------------------------------------------- cross-domain

Outcome criterion_cross_domain(const fs::path& work) {
  Outcome o;
  const fs::path dir = work / "toy";
  fs::create_directories(dir / "raw");
  SyntheticCorpusOptions opt;
  opt.dialogues = 200;
  opt.seed = 8;
  const SyntheticCorpus raw = synthetic_dailydialog(opt);
  write(dir / "raw" / "dialogues_text.txt", raw.text);
  write(dir / "raw" / "dialogues_act.txt", raw.acts);
  write(dir / "raw" / "vectors.txt", synthetic_embeddings(synthetic_lexicon(), 50, 8));
  cli({"prepare", "--input", (dir / "raw").string(), "--seed", "8", "--out", (dir / "corpus").string()});
  std::string pair_dirs;
  for (Domain domain : kAllDomains) {
    const std::string name = domain_name(domain);
    cli({"perturb", "--corpus", (dir / "corpus").string(), "--domain", name, "--per-dialogue", "20", "--seed", "8",
         "--out", (dir / name).string()});
    pair_dirs += (pair_dirs.empty() ? "" : ",") + (dir / name).string();
  }
  cli({"train", "--pairs", (dir / "uo").string(), "--regime", "s-dicoh", "--epochs", "3", "--utt-hidden", "16",
       "--dial-hidden", "16", "--batch-size", "64", "--lr", "0.001", "--embeddings", (dir / "raw" / "vectors.txt").string(),
       "--embed-dim", "50", "--seed", "1", "--seeds", "5", "--out", (dir / "train").string()});
  std::size_t wins = 0;
  std::string rows;
  for (int seed = 1; seed <= 5; ++seed) {
    const fs::path out = dir / ("eval-" + std::to_string(seed));
    cli({"eval", "--checkpoint", (dir / "train" / ("seed-" + std::to_string(seed)) / "model.ckpt").string(), "--pairs",
         pair_dirs, "--split", "test", "--out", out.string()});
    const json cells = read_json(out / "report.json")["cells"];
    o.require(cells.size() == 4, "seed " + std::to_string(seed) + " grid has " + std::to_string(cells.size()) + " cells");
    if (cells.size() != 4) continue;
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c["mean"]);
    wins += cells[0]["domain"] == "uo" && row[0] >= *std::max_element(row.begin(), row.end());
    rows += " [";
    for (std::size_t k = 0; k < row.size(); ++k) rows += (k ? " " : "") + fixed(row[k], 3);
    rows += "]";
  }
  o.require(wins >= 4, "UO is the row maximum in " + std::to_string(wins) + " of 5 seeds:" + rows);
  o.note("UO maximum in " + std::to_string(wins) + "/5 seeds; uo ui ur euo:" + rows);
  return o;
}

// ------------------------------------------------------------ round trip

Outcome criterion_round_trip(const fs::path& fixture, const fs::path& work) {
  Outcome o;
  const ParsedCorpus parsed = parse_dailydialog(fixture / "dialogues_text.txt", fixture / "dialogues_act.txt");
  o.require(parsed.dialogues.size() == 10, std::to_string(parsed.dialogues.size()) + " dialogues parsed");
  bool uncle = false;
  for (const auto& d : parsed.dialogues) uncle = uncle || (d.size() > 0 && d.utterances[0] == "This is my uncle, Charles.");
  o.require(uncle, "uncle dialogue missing");
  const fs::path canonical = work / "fixture.jsonl";
  write_canonical(canonical, parsed.dialogues);
  o.require(read_canonical(canonical) == parsed.dialogues, "canonical round trip is lossy");

  const fs::path out = work / "fixture-prepare";
  cli({"prepare", "--input", fixture.string(), "--out", out.string()});
  const json stats = read_json(out / "stats.json");
  const json expected = read_json(fixture / "expected_stats.json");
  for (const char* key : {"dialogues", "utterances", "words", "label_counts"}) {
    o.require(stats["total"][key] == expected[key], std::string(key) + " " + stats["total"][key].dump() + " vs " +
                                                         expected[key].dump());
  }
  for (const auto& [split, n] : expected["splits"].items()) {
    o.require(stats["splits"][split]["dialogues"] == n, split + " split size " + stats["splits"][split]["dialogues"].dump());
  }
  Splits back = read_corpus_dir(out);
  std::vector<Dialogue> all = back.train.dialogues;
  all.insert(all.end(), back.validation.dialogues.begin(), back.validation.dialogues.end());
  all.insert(all.end(), back.test.dialogues.begin(), back.test.dialogues.end());
  std::sort(all.begin(), all.end(), [](const Dialogue& a, const Dialogue& b) { return a.id < b.id; });
  std::vector<Dialogue> want = parsed.dialogues;
  std::sort(want.begin(), want.end(), [](const Dialogue& a, const Dialogue& b) { return a.id < b.id; });
  o.require(all == want, "prepared splits differ from the parsed fixture");
  o.note("10 dialogues, 33 utterances, 119 words, splits 8/1/1");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks", "dicoh_acceptance"};
  std::string work = (fs::temp_directory_path() / "dicoh-acceptance").string();
  std::string fixture = DICOH_TEST_DATA_DIR "/dailydialog";
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--fixture", fixture, "DailyDialog fixture directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const char* real = std::getenv("DICOH_DAILYDIALOG_DIR");
  const std::string real_corpus = real && *real ? real : "";
  fs::remove_all(work);
  fs::create_directories(work);
  auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };

  const std::map<int, std::string> names = {
      {1, "gradient suite"},      {2, "loss algebra"},        {3, "perturbation properties"},
      {4, "metric oracles"},      {5, "scaled training trend"}, {6, "multi-task mechanism"},
      {7, "determinism"},         {8, "cross-domain harness"}, {9, "data round trip"},
  };
  std::map<int, Outcome> results;
  auto guarded = [&](std::initializer_list<int> ids, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      for (int id : ids) {
        Outcome o;
        o.require(false, std::string("error: ") + e.what());
        results[id] = o;
      }
    }
  };
  auto report = [&](int id) {
    const Outcome& o = results[id];
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << names.at(id) << "): " << o.detail
              << std::endl;
  };

  if (wanted(1)) guarded({1}, [&] { results[1] = criterion_gradients(); }), report(1);
  if (wanted(2)) guarded({2}, [&] { results[2] = criterion_loss_algebra(); }), report(2);
  if (wanted(3)) guarded({3}, [&] { results[3] = criterion_perturbations(); }), report(3);

  std::optional<Experiment> experiment;
  if (wanted(4) || wanted(5) || wanted(6) || wanted(7)) {
    guarded({4, 5, 6, 7}, [&] { experiment = prepare_experiment(work, "subset", 500, 1, real_corpus); });
  }
  if (wanted(4) && experiment) guarded({4}, [&] { results[4] = criterion_metrics(experiment->uo, work); });
  if (wanted(4)) report(4);
  if ((wanted(5) || wanted(6) || wanted(7)) && experiment) {
    guarded({5, 6, 7}, [&] {
      TrainingOutcomes t = criteria_training(*experiment, work);
      results[5] = t.trend;
      results[6] = t.mtl;
      results[7] = t.determinism;
    });
  }
  for (int id : {5, 6, 7}) {
    if (wanted(id)) report(id);
  }
  if (wanted(8)) guarded({8}, [&] { results[8] = criterion_cross_domain(work); }), report(8);
  if (wanted(9)) guarded({9}, [&] { results[9] = criterion_round_trip(fixture, work); }), report(9);

  std::size_t failed = 0;
  for (const auto& [id, o] : results) failed += !o.pass;
  std::cout << results.size() - failed << " of " << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
