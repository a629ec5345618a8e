#include "dicoh/vocabulary.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "dicoh/error.hpp"
#include "dicoh/rng.hpp"
#include "dicoh/tokenizer.hpp"

namespace dicoh {

Vocabulary::Vocabulary() {
  push(std::string(kPadToken));
  push(std::string(kUnkToken));
}

void Vocabulary::push(std::string token) {
  map_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> tokenized_texts) {
  std::map<std::string, std::size_t> freq;
  for (const auto& text : tokenized_texts)
    for (const auto& tok : text)
      if (tok != kPadToken && tok != kUnkToken) ++freq[tok];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [tok, n] : items) v.push(tok);
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens_after_specials) {
  Vocabulary v;
  for (auto& t : tokens_after_specials) {
    if (t == kPadToken || t == kUnkToken) throw DataError("special token '" + t + "' listed as a corpus token");
    if (v.contains(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    v.push(std::move(t));
  }
  return v;
}

std::size_t Vocabulary::index(const std::string& token) const {
  auto it = map_.find(token);
  return it == map_.end() ? kUnk : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined += '\n';
  }
  return hash_string(joined);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) os << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  if (lines.size() < 2 || lines[0] != kPadToken || lines[1] != kUnkToken) {
    throw ParseError(path.string() + ": vocabulary must start with <PAD> and <UNK>", 1);
  }
  lines.erase(lines.begin(), lines.begin() + 2);
  return from_tokens(std::move(lines));
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dicoh
