#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dicoh/dialogue.hpp"

namespace dicoh {

struct CorpusSplit {
  std::string name;  // train, validation or test
  std::vector<Dialogue> dialogues;
};

struct ParsedCorpus {
  std::vector<Dialogue> dialogues;
  std::size_t skipped_empty = 0;
  std::vector<std::string> warnings;
};

// DailyDialog raw layout: one dialogue per line with utterances separated
// by "__eou__", and a parallel act file with one integer in 1..4 per
// utterance. Speakers alternate 0, 1, 0, ... Dialogue ids are
// "<id_prefix>-<line>".
ParsedCorpus parse_dailydialog(const std::filesystem::path& text_path, const std::filesystem::path& act_path,
                               const std::string& id_prefix = "dd");
// Same parser over in-memory text; `source` names the input in errors.
ParsedCorpus parse_dailydialog_text(const std::string& text, const std::string& acts, const std::string& id_prefix,
                                    const std::string& source = "<memory>");

struct Splits {
  CorpusSplit train{"train", {}};
  CorpusSplit validation{"validation", {}};
  CorpusSplit test{"test", {}};
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// Seeded shuffle then contiguous slices. Validation and test take
// floor(n * fraction); the remainder goes to train.
Splits split_corpus(std::vector<Dialogue> dialogues, SplitFractions fractions, std::uint64_t seed);

// Line-delimited JSON, one dialogue per line:
// {"id":..., "utterances":[...], "speakers":[...], "da_labels":[...]}
// da_labels is omitted for unlabelled dialogues.
void write_canonical(const std::filesystem::path& path, const std::vector<Dialogue>& dialogues);
std::vector<Dialogue> read_canonical(const std::filesystem::path& path);
std::string to_canonical_line(const Dialogue& dialogue);
Dialogue from_canonical_line(const std::string& line, std::size_t line_number = 0);

// Canonical corpus directory: train.jsonl, validation.jsonl, test.jsonl.
void write_corpus_dir(const std::filesystem::path& dir, const Splits& splits);
Splits read_corpus_dir(const std::filesystem::path& dir);
std::filesystem::path split_file(const std::filesystem::path& dir, const std::string& split);

struct CorpusStats {
  std::size_t dialogues = 0;
  std::size_t utterances = 0;
  std::size_t words = 0;  // tokenizer tokens containing a letter or digit
  std::vector<std::size_t> label_counts;
  double utterances_per_dialogue() const;
  double words_per_utterance() const;
};

CorpusStats compute_stats(const std::vector<Dialogue>& dialogues, std::size_t num_labels);

}  // namespace dicoh
