#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <vector>

#include "dicoh/corpus.hpp"
#include "dicoh/error.hpp"
#include "dicoh/pair_dataset.hpp"
#include "dicoh/perturbations.hpp"
#include "dicoh/synthetic.hpp"

namespace dicoh {
namespace {

Dialogue uncle_dialogue() {
  Dialogue d;
  d.id = "uncle";
  d.utterances = {"This is my uncle, Charles.", "He looks strong. What does he do?", "He's a captain.",
                  "He must be very brave.", "Exactly!"};
  d.speakers = {0, 1, 0, 1, 0};
  d.da_labels = {0, 1, 0, 0, 0};
  return d;
}

Dialogue make(std::string id, std::vector<std::string> utts) {
  Dialogue d;
  d.id = std::move(id);
  for (std::size_t k = 0; k < utts.size(); ++k) {
    d.speakers.push_back(static_cast<int>(k % 2));
    d.da_labels.push_back(static_cast<int>(k % 4));
  }
  d.utterances = std::move(utts);
  return d;
}

std::vector<Dialogue> synthetic(std::size_t n, std::uint64_t seed) {
  SyntheticCorpusOptions opt;
  opt.dialogues = n;
  opt.seed = seed;
  SyntheticCorpus raw = synthetic_dailydialog(opt);
  return parse_dailydialog_text(raw.text, raw.acts, "syn").dialogues;
}

std::multiset<std::string> texts(const Dialogue& d) { return {d.utterances.begin(), d.utterances.end()}; }

std::size_t differing_slots(const Dialogue& a, const Dialogue& b) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) n += a.utterances[k] != b.utterances[k];
  return n;
}

TEST(Perturb, EvenOrderSwapOnTheUncleDialogue) {
  // [DERIVED] speaker 1 owns slots 1 and 3; swapping them is the only EUO
  // change for that speaker.
  PerturbationSpec spec;
  spec.kind = Domain::EUO;
  spec.speaker = 1;
  spec.permutation = {1, 0};
  Dialogue d = uncle_dialogue();
  Dialogue p = apply_perturbation(spec, d);
  EXPECT_EQ(p.utterances, (std::vector<std::string>{"This is my uncle, Charles.", "He must be very brave.",
                                                    "He's a captain.", "He looks strong. What does he do?",
                                                    "Exactly!"}));
  EXPECT_EQ(p.speakers, d.speakers);
  EXPECT_EQ(p.da_labels, (std::vector<int>{0, 0, 0, 1, 0}));
  // [DERIVED] speaker 0: 3! - 1 = 5 orders, speaker 1: 2! - 1 = 1.
  EXPECT_EQ(enumerate_perturbations(Domain::EUO, d)->size(), 6u);
}

TEST(Perturb, InsertionSpaceOfFourUtterances) {
  // [DERIVED] 4 * 3 = 12 moves; moving k to k+1 equals moving k+1 to k for
  // the 3 adjacent pairs, leaving 9 distinct orders.
  Dialogue d = make("d", {"a", "b", "c", "d"});
  auto all = enumerate_perturbations(Domain::UI, d);
  ASSERT_TRUE(all.has_value());
  EXPECT_EQ(all->size(), 9u);
  std::set<std::vector<std::string>> seen;
  for (const auto& s : *all) seen.insert(apply_perturbation(s, d).utterances);
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_EQ(seen.count(d.utterances), 0u);
}

TEST(Perturb, InsertionMovesOneUtterance) {
  PerturbationSpec spec;
  spec.kind = Domain::UI;
  spec.removed_index = 0;
  spec.reinsert_index = 3;
  Dialogue p = apply_perturbation(spec, make("d", {"a", "b", "c", "d", "e"}));
  EXPECT_EQ(p.utterances, (std::vector<std::string>{"b", "c", "d", "a", "e"}));
  EXPECT_EQ(p.speakers, (std::vector<int>{1, 0, 1, 0, 0}));
}

TEST(Perturb, OrderingSpaceCounts) {
  EXPECT_EQ(enumerate_perturbations(Domain::UO, make("d", {"a", "b", "c", "d"}))->size(), 23u);
  // [DERIVED] 4! / 2! orders of a multiset with one repeated text, minus the original.
  EXPECT_EQ(enumerate_perturbations(Domain::UO, make("d", {"a", "b", "a", "c"}))->size(), 11u);
  EXPECT_FALSE(enumerate_perturbations(Domain::UO, make("d", {"1", "2", "3", "4", "5", "6", "7", "8"})).has_value());
  EXPECT_FALSE(enumerate_perturbations(Domain::UR, make("d", {"a", "b"})).has_value());
}

TEST(Perturb, UnperturbableDialoguesYieldNothing) {
  SeededRng rng(1);
  EXPECT_FALSE(perturb_uo(make("d", {"a"}), rng));
  EXPECT_FALSE(perturb_uo(make("d", {"a", "a", "a"}), rng));
  EXPECT_FALSE(perturb_ui(make("d", {"a", "a"}), rng));
  EXPECT_FALSE(perturb_euo(make("d", {"a", "b"}), rng));
  EXPECT_FALSE(perturb_euo(make("d", {"a", "b", "a"}), rng));
}

TEST(Perturb, ReplacementTakesTheDonorLabelAndKeepsTheSpeaker) {
  std::vector<Dialogue> corpus{make("x", {"a", "b", "c"}), make("y", {"p", "q"})};
  SeededRng rng(4);
  for (int k = 0; k < 50; ++k) {
    auto spec = perturb_ur(corpus[0], corpus, rng);
    ASSERT_TRUE(spec);
    EXPECT_EQ(spec->donor_dialogue_id, "y");
    Dialogue p = apply_perturbation(*spec, corpus[0]);
    EXPECT_EQ(differing_slots(p, corpus[0]), 1u);
    EXPECT_EQ(p.speakers, corpus[0].speakers);
    EXPECT_EQ(p.da_labels[spec->replaced_index], corpus[1].da_labels[spec->donor_utterance_index]);
  }
  EXPECT_THROW(perturb_ur(corpus[0], std::span(corpus).first(1), rng), PreconditionError);
}

TEST(Perturb, InvalidSpecsAreRejected) {
  Dialogue d = make("d", {"a", "b", "c"});
  PerturbationSpec uo;
  uo.permutation = {0, 0, 1};
  EXPECT_THROW(apply_perturbation(uo, d), PreconditionError);
  PerturbationSpec ui;
  ui.kind = Domain::UI;
  ui.removed_index = 1;
  ui.reinsert_index = 1;
  EXPECT_THROW(apply_perturbation(ui, d), PreconditionError);
  EXPECT_THROW(parse_domain("xx"), ConfigError);
}

class DomainProperties : public ::testing::TestWithParam<Domain> {};

TEST_P(DomainProperties, InvariantsHoldOnSyntheticDialogues) {
  const Domain domain = GetParam();
  const auto corpus = synthetic(120, 2);
  for (const Dialogue& d : corpus) {
    SeededRng rng(dialogue_seed(9, d.id, domain));
    auto specs = distinct_perturbations(domain, d, corpus, kPerturbationsPerDialogue, rng);
    EXPECT_LE(specs.size(), kPerturbationsPerDialogue);
    std::set<std::vector<std::string>> seen;
    for (const auto& s : specs) {
      Dialogue p = apply_perturbation(s, d);
      ASSERT_NO_THROW(p.validate());
      EXPECT_NE(p.utterances, d.utterances) << d.id;
      EXPECT_TRUE(seen.insert(p.utterances).second) << d.id << " duplicate";
      EXPECT_EQ(p.size(), d.size());
      switch (domain) {
        case Domain::UO:
          EXPECT_EQ(texts(p), texts(d));
          break;
        case Domain::UI: {
          EXPECT_EQ(texts(p), texts(d));
          // Removing one utterance from each leaves the same sequence.
          Dialogue a = d, b = p;
          a.utterances.erase(a.utterances.begin() + static_cast<std::ptrdiff_t>(s.removed_index));
          b.utterances.erase(b.utterances.begin() + static_cast<std::ptrdiff_t>(s.reinsert_index));
          EXPECT_EQ(a.utterances, b.utterances);
          break;
        }
        case Domain::UR:
          EXPECT_EQ(differing_slots(p, d), 1u);
          EXPECT_EQ(p.speakers, d.speakers);
          break;
        case Domain::EUO:
          EXPECT_EQ(texts(p), texts(d));
          EXPECT_EQ(p.speakers, d.speakers);
          for (std::size_t k = 0; k < d.size(); ++k) {
            if (d.speakers[k] != s.speaker) EXPECT_EQ(p.utterances[k], d.utterances[k]);
          }
          break;
      }
    }
    SeededRng again(dialogue_seed(9, d.id, domain));
    EXPECT_EQ(distinct_perturbations(domain, d, corpus, kPerturbationsPerDialogue, again), specs);
  }
}

TEST_P(DomainProperties, PairDatasetIsBalancedAndReplays) {
  const Domain domain = GetParam();
  const auto corpus = synthetic(60, 3);
  PairDataset a = build_pair_dataset(corpus, domain, kPerturbationsPerDialogue, 11);
  PairDataset b = build_pair_dataset(corpus, domain, kPerturbationsPerDialogue, 11);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  EXPECT_EQ(a.pairs.size(), 2 * a.perturbations);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const auto& p = a.pairs[i];
    ones += static_cast<std::size_t>(p.label);
    EXPECT_EQ(p.label, static_cast<int>(i % 2));
    EXPECT_FALSE(p.original().perturbation.has_value());
    ASSERT_TRUE(p.perturbed().perturbation.has_value());
    const Dialogue replay = apply_perturbation(*p.perturbed().perturbation, *p.original().dialogue);
    EXPECT_EQ(replay.utterances, p.perturbed().dialogue->utterances);
    EXPECT_EQ(replay.speakers, p.perturbed().dialogue->speakers);
    EXPECT_EQ(replay.da_labels, p.perturbed().dialogue->da_labels);
    EXPECT_EQ(p.pair_id, b.pairs[i].pair_id);
    EXPECT_EQ(*p.a.dialogue, *b.pairs[i].a.dialogue);
  }
  EXPECT_EQ(2 * ones, a.pairs.size());
}

INSTANTIATE_TEST_SUITE_P(AllDomains, DomainProperties, ::testing::ValuesIn(kAllDomains),
                         [](const auto& info) { return domain_name(info.param); });

TEST(PairDataset, FiveUtteranceDialogueGivesFortyPairs) {
  std::vector<Dialogue> corpus{uncle_dialogue()};
  PairDataset ds = build_pair_dataset(corpus, Domain::UO);
  EXPECT_EQ(ds.perturbations, 20u);
  EXPECT_EQ(ds.pairs.size(), 40u);
  EXPECT_EQ(ds.pairs[0].pair_id, "uncle#uo-0/0");
  EXPECT_EQ(ds.pairs[1].pair_id, "uncle#uo-0/1");
  EXPECT_EQ(ds.pairs[1].label, 1);
  EXPECT_EQ(ds.pairs[0].b.dialogue->id, "uncle#uo-0");
}

TEST(PairDataset, TwoUtteranceOrderingGivesTwoPairs) {
  std::vector<Dialogue> corpus{make("short", {"hi", "bye"}), make("one", {"alone"})};
  PairDataset ds = build_pair_dataset(corpus, Domain::UO);
  EXPECT_EQ(ds.pairs.size(), 2u);
  EXPECT_EQ(ds.skipped, (std::vector<std::string>{"one"}));
}

TEST(PairDataset, JsonlRoundTripSharesDialogues) {
  const auto corpus = synthetic(10, 4);
  for (Domain domain : kAllDomains) {
    PairDataset ds = build_pair_dataset(corpus, domain, 5, 1);
    auto path = std::filesystem::temp_directory_path() / "dicoh-unit" / ("pairs-" + domain_name(domain) + ".jsonl");
    std::filesystem::create_directories(path.parent_path());
    write_pairs(path, ds.pairs);
    auto back = read_pairs(path);
    ASSERT_EQ(back.size(), ds.pairs.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].pair_id, ds.pairs[i].pair_id);
      EXPECT_EQ(back[i].label, ds.pairs[i].label);
      EXPECT_EQ(back[i].domain, domain);
      EXPECT_EQ(*back[i].a.dialogue, *ds.pairs[i].a.dialogue);
      EXPECT_EQ(*back[i].b.dialogue, *ds.pairs[i].b.dialogue);
      EXPECT_EQ(back[i].perturbed().perturbation, ds.pairs[i].perturbed().perturbation);
    }
    if (back.size() >= 2) EXPECT_EQ(back[0].original().dialogue.get(), back[1].original().dialogue.get());
    EXPECT_EQ(original_dialogues(back).size(), corpus.size() - ds.skipped.size());
  }
}

}  // namespace
}  // namespace dicoh
