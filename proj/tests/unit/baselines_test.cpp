#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dicoh/baselines.hpp"
#include "dicoh/error.hpp"
#include "dicoh/metrics.hpp"

namespace dicoh {
namespace {

PretrainedVectors toy_vectors() {
  PretrainedVectors v(2);
  v.add("cat", {1.0, 0.0});
  v.add("dog", {0.0, 1.0});
  v.add("kitten", {1.0, 1.0});
  v.add("the", {5.0, -5.0});
  return v;
}

Dialogue dialogue(std::vector<std::string> utts) {
  Dialogue d;
  d.id = "d";
  for (std::size_t k = 0; k < utts.size(); ++k) d.speakers.push_back(static_cast<int>(k % 2));
  d.utterances = std::move(utts);
  return d;
}

TEST(Stopwords, SmartListContents) {
  const StopwordList& smart = StopwordList::smart();
  EXPECT_EQ(smart.size(), 570u);
  for (const char* w : {"a", "the", "and", "would", "zero", "a's", "whereafter"}) EXPECT_TRUE(smart.contains(w)) << w;
  EXPECT_TRUE(smart.contains("The"));
  for (const char* w : {"cat", "captain", "uncle"}) EXPECT_FALSE(smart.contains(w)) << w;
}

TEST(Stopwords, TextFormat) {
  StopwordList l = StopwordList::from_text("# header\nFoo\n\n  bar  \n#baz\n");
  EXPECT_EQ(l.size(), 2u);
  EXPECT_TRUE(l.contains("foo"));
  EXPECT_TRUE(l.contains("BAR"));
  EXPECT_FALSE(l.contains("#baz"));
  EXPECT_THROW(StopwordList::load("/nonexistent/stopwords.txt"), Error);
}

TEST(CoSim, HandComputedScore) {
  // [DERIVED] u = (1,0), (0,1), mean((1,0),(1,1)) = (1,0.5); cosines 0 and
  // 0.5 / sqrt(1.25); mean = 1 / (2 sqrt 5).
  const double s = cosim_score(dialogue({"The cat.", "A dog!", "cat and kitten"}), toy_vectors(), StopwordList::smart());
  EXPECT_NEAR(s, 1.0 / (2.0 * std::sqrt(5.0)), 1e-15);
}

TEST(CoSim, StopwordsAndUnknownWordsDoNotMatter) {
  const auto v = toy_vectors();
  const auto& sw = StopwordList::smart();
  const double base = cosim_score(dialogue({"cat", "dog kitten", "kitten"}), v, sw);
  EXPECT_EQ(cosim_score(dialogue({"the cat , which", "dog and the kitten", "zyzzyva kitten !"}), v, sw), base);
}

TEST(CoSim, DegenerateDialogues) {
  const auto v = toy_vectors();
  const auto& sw = StopwordList::smart();
  EXPECT_EQ(cosim_score(dialogue({"cat"}), v, sw), 0.0);
  EXPECT_EQ(cosim_score(dialogue({"the", "a"}), v, sw), 0.0);
  EXPECT_DOUBLE_EQ(cosim_score(dialogue({"cat", "cat"}), v, sw), 1.0);
  // Without stopword filtering "the" carries its own vector.
  EXPECT_NE(cosim_score(dialogue({"the", "cat"}), v, StopwordList()), 0.0);
}

TEST(RandomBaseline, FairCoin) {
  SeededRng rng(99);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += random_rank(rng);
  // Binomial(10000, 0.5) has sd 50; allow 4 sd.
  EXPECT_NEAR(ones, 5000, 200);
}

TEST(RandomBaseline, PairwiseAccuracyNearHalf) {
  SeededRng rng(7);
  std::vector<ScoredPair> pairs;
  for (int i = 0; i < 2000; ++i) {
    const int label = i % 2;
    const int guess = random_rank(rng);
    pairs.push_back({guess == 0 ? 1.0 : 0.0, guess == 0 ? 0.0 : 1.0, label});
  }
  const double acc = pairwise_accuracy(pairs).accuracy;
  EXPECT_GE(acc, 0.47);
  EXPECT_LE(acc, 0.53);
}

}  // namespace
}  // namespace dicoh
