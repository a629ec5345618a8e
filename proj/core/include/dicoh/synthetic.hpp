#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dicoh {

// Scripted small-talk dialogues in the DailyDialog raw layout. Each dialogue
// opens with a greeting and a question, continues with question/answer and
// request/promise exchanges on one topic, and closes with thanks and a
// goodbye. Acts use the DailyDialog coding 1..4.
struct SyntheticCorpusOptions {
  std::size_t dialogues = 500;
  std::uint64_t seed = 0;
  std::size_t min_exchanges = 1;  // between the opening and closing exchanges
  std::size_t max_exchanges = 4;
};

struct SyntheticCorpus {
  std::string text;  // one dialogue per line, utterances ended by "__eou__"
  std::string acts;  // one line per dialogue, space-separated integers
};

SyntheticCorpus synthetic_dailydialog(const SyntheticCorpusOptions& options);

// Every lowercase token the generator can emit.
std::vector<std::string> synthetic_lexicon();

// Whitespace-separated word vectors ("token v1 ... v_dim" per line) for
// `words`. Words of one topic share a direction so similar words are close.
std::string synthetic_embeddings(const std::vector<std::string>& words, std::size_t dim, std::uint64_t seed);

}  // namespace dicoh
