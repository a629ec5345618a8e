#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dicoh {

// Token <-> index bijection. Index 0 is <PAD>, index 1 is <UNK>.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary();

  // Corpus tokens ordered by (frequency desc, token asc). Tokens spelled
  // like the special markers are not added; they map to <UNK>.
  static Vocabulary build(std::span<const std::vector<std::string>> tokenized_texts);
  static Vocabulary from_tokens(std::vector<std::string> tokens_after_specials);

  std::size_t size() const { return tokens_.size(); }
  std::size_t index(const std::string& token) const;
  bool contains(const std::string& token) const { return map_.count(token) != 0; }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the newline-joined token list; identifies the vocabulary in
  // checkpoints and dataset manifests.
  std::uint64_t hash() const;

  // One token per line, index = line number (0-based), specials included.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> map_;
};

std::string hash_hex(std::uint64_t h);

}  // namespace dicoh
