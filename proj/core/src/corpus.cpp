#include "dicoh/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dicoh/error.hpp"
#include "dicoh/rng.hpp"
#include "dicoh/tokenizer.hpp"

namespace dicoh {
namespace {

using json = nlohmann::json;

constexpr std::string_view kSeparator = "__eou__";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_utterances(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(kSeparator, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + kSeparator.size();
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

ParsedCorpus parse_dailydialog(const std::filesystem::path& text_path, const std::filesystem::path& act_path,
                               const std::string& id_prefix) {
  for (const auto& p : {text_path, act_path}) {
    if (!std::filesystem::is_regular_file(p)) throw Error("no such file: " + p.string());
  }
  return parse_dailydialog_text(read_file(text_path), read_file(act_path), id_prefix, text_path.string());
}

ParsedCorpus parse_dailydialog_text(const std::string& text, const std::string& acts, const std::string& id_prefix,
                                    const std::string& source) {
  const auto text_lines = split_lines(text);
  const auto act_lines = split_lines(acts);
  ParsedCorpus out;
  for (std::size_t k = 0; k < text_lines.size(); ++k) {
    const std::size_t line_no = k + 1;
    if (trim(text_lines[k]).empty()) {
      ++out.skipped_empty;
      out.warnings.push_back(source + ": line " + std::to_string(line_no) + " is empty, skipped");
      continue;
    }
    if (k >= act_lines.size()) throw ParseError(source + ": no dialogue act line for this dialogue", line_no);

    Dialogue d;
    d.id = id_prefix + "-" + std::to_string(line_no);
    d.utterances = split_utterances(text_lines[k]);
    std::istringstream act_stream(act_lines[k]);
    std::string field;
    while (act_stream >> field) {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size()) throw ParseError(source + ": act '" + field + "' is not an integer", line_no);
      if (value < 1 || value > 4) {
        throw ParseError(source + ": act value " + field + " outside 1..4", line_no);
      }
      d.da_labels.push_back(value - 1);
    }
    if (d.da_labels.size() != d.utterances.size()) {
      throw ParseError(source + ": " + std::to_string(d.utterances.size()) + " utterances but " +
                           std::to_string(d.da_labels.size()) + " dialogue acts",
                       line_no);
    }
    for (std::size_t u = 0; u < d.utterances.size(); ++u) d.speakers.push_back(static_cast<int>(u % 2));
    out.dialogues.push_back(std::move(d));
  }
  for (std::size_t k = text_lines.size(); k < act_lines.size(); ++k) {
    if (!trim(act_lines[k]).empty()) throw ParseError(source + ": act file has more dialogues than the text", k + 1);
  }
  return out;
}

Splits split_corpus(std::vector<Dialogue> dialogues, SplitFractions f, std::uint64_t seed) {
  if (dialogues.size() < 3) throw PreconditionError("splitting needs at least 3 dialogues");
  if (f.train < 0 || f.validation < 0 || f.test < 0 || std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be nonnegative and sum to 1");
  }
  SeededRng rng(seed);
  rng.shuffle(dialogues.begin(), dialogues.end());
  const double n = static_cast<double>(dialogues.size());
  const auto n_val = static_cast<std::size_t>(std::floor(n * f.validation + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * f.test + 1e-9));
  const std::size_t n_train = dialogues.size() - n_val - n_test;
  Splits s;
  auto it = std::make_move_iterator(dialogues.begin());
  s.train.dialogues.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  s.validation.dialogues.assign(it + static_cast<std::ptrdiff_t>(n_train),
                                it + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.dialogues.assign(it + static_cast<std::ptrdiff_t>(n_train + n_val), std::make_move_iterator(dialogues.end()));
  return s;
}

std::string to_canonical_line(const Dialogue& d) {
  json j;
  j["id"] = d.id;
  j["utterances"] = d.utterances;
  j["speakers"] = d.speakers;
  if (d.has_labels()) j["da_labels"] = d.da_labels;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Dialogue from_canonical_line(const std::string& line, std::size_t line_number) {
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw ParseError("dialogue record is not an object", line_number);
    for (const char* key : {"id", "utterances", "speakers"}) {
      if (!j.contains(key)) throw ParseError(std::string("dialogue record lacks '") + key + "'", line_number);
    }
    Dialogue d;
    d.id = j.at("id").get<std::string>();
    d.utterances = j.at("utterances").get<std::vector<std::string>>();
    d.speakers = j.at("speakers").get<std::vector<int>>();
    if (j.contains("da_labels")) d.da_labels = j.at("da_labels").get<std::vector<int>>();
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed dialogue record: ") + e.what(), line_number);
  } catch (const DataError& e) {
    throw ParseError(e.what(), line_number);
  }
}

void write_canonical(const std::filesystem::path& path, const std::vector<Dialogue>& dialogues) {
  auto out = open_out(path);
  for (const auto& d : dialogues) out << to_canonical_line(d) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<Dialogue> read_canonical(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error("no such file: " + path.string());
  const auto lines = split_lines(read_file(path));
  std::vector<Dialogue> out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (trim(lines[k]).empty()) continue;
    try {
      out.push_back(from_canonical_line(lines[k], k + 1));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path split_file(const std::filesystem::path& dir, const std::string& split) {
  return dir / (split + ".jsonl");
}

void write_corpus_dir(const std::filesystem::path& dir, const Splits& splits) {
  for (const CorpusSplit* s : {&splits.train, &splits.validation, &splits.test}) {
    write_canonical(split_file(dir, s->name), s->dialogues);
  }
}

Splits read_corpus_dir(const std::filesystem::path& dir) {
  Splits s;
  for (CorpusSplit* split : {&s.train, &s.validation, &s.test}) {
    split->dialogues = read_canonical(split_file(dir, split->name));
  }
  return s;
}

double CorpusStats::utterances_per_dialogue() const {
  return dialogues ? static_cast<double>(utterances) / static_cast<double>(dialogues) : 0.0;
}

double CorpusStats::words_per_utterance() const {
  return utterances ? static_cast<double>(words) / static_cast<double>(utterances) : 0.0;
}

CorpusStats compute_stats(const std::vector<Dialogue>& dialogues, std::size_t num_labels) {
  CorpusStats s;
  s.label_counts.assign(num_labels, 0);
  s.dialogues = dialogues.size();
  for (const auto& d : dialogues) {
    s.utterances += d.size();
    for (const auto& u : d.utterances) {
      for (const auto& t : tokenize(u)) s.words += is_word_token(t) ? 1 : 0;
    }
    for (int label : d.da_labels) {
      if (label >= 0 && static_cast<std::size_t>(label) < num_labels) ++s.label_counts[static_cast<std::size_t>(label)];
    }
  }
  return s;
}

}  // namespace dicoh
