#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>

#include "dicoh/dialogue.hpp"
#include "dicoh/embeddings.hpp"
#include "dicoh/rng.hpp"

namespace dicoh {

// Fair coin: the predicted preference label for one pair.
int random_rank(SeededRng& rng);

class StopwordList {
 public:
  StopwordList() = default;
  // One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList from_text(const std::string& text);
  // The SMART English list bundled with the library.
  static const StopwordList& smart();

  bool contains(const std::string& token) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Mean cosine similarity of adjacent utterances, each represented by the
// mean vector of its content tokens (word tokens that are not stopwords and
// have a vector). Content-free utterances are zero vectors, any cosine with
// a zero vector is 0 and single-utterance dialogues score 0.
double cosim_score(const Dialogue& dialogue, const PretrainedVectors& vectors, const StopwordList& stopwords);

}  // namespace dicoh
