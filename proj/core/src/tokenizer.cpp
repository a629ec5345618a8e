#include "dicoh/tokenizer.hpp"

#include <cctype>

namespace dicoh {
namespace {

bool is_split_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case '\'': case ';': case ':': case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      std::string chunk(text.substr(i, j - i));
      for (char& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      std::size_t b = 0, e = chunk.size();
      while (b < e && is_split_punct(chunk[b])) ++b;
      while (e > b && is_split_punct(chunk[e - 1])) --e;
      for (std::size_t k = 0; k < b; ++k) tokens.emplace_back(1, chunk[k]);
      if (e > b) tokens.push_back(chunk.substr(b, e - b));
      for (std::size_t k = e; k < chunk.size(); ++k) tokens.emplace_back(1, chunk[k]);
    }
    i = j;
  }
  if (tokens.empty()) tokens.emplace_back(kUnkToken);
  return tokens;
}

bool is_word_token(std::string_view token) {
  for (unsigned char c : token)
    if (std::isalnum(c) || c >= 0x80) return true;
  return false;
}

}  // namespace dicoh
