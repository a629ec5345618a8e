#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicoh/rng.hpp"
#include "dicoh/tensor.hpp"
#include "dicoh/vocabulary.hpp"

namespace dicoh {

inline constexpr std::size_t kPretrainedDim = 300;

// Word vectors read from a whitespace-separated text file: one token
// followed by `dim` decimals per line.
class PretrainedVectors {
 public:
  // Only tokens contained in `keep` are retained when it is non-null.
  // A first line of the wrong width is a ConfigError; any later line of a
  // different width or with an unparsable number is a ParseError.
  static PretrainedVectors load(const std::filesystem::path& path, std::size_t dim = kPretrainedDim,
                                const Vocabulary* keep = nullptr);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  // Null when the token has no vector.
  const double* find(const std::string& token) const;
  void add(const std::string& token, const std::vector<double>& v);

  explicit PretrainedVectors(std::size_t dim = kPretrainedDim) : dim_(dim) {}

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

struct EmbeddingMatrix {
  Tensor matrix;  // |vocab| x dim; row 0 (<PAD>) is all zero
  bool trainable = true;
  double coverage = 0.0;  // fraction of non-special tokens found in the file
};

// Rows for tokens with a pretrained vector are copied; every other row
// except <PAD> is drawn uniformly from [-0.05, 0.05].
EmbeddingMatrix embeddings_from_vectors(const PretrainedVectors& vectors, const Vocabulary& vocab, SeededRng& rng);
EmbeddingMatrix load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab, SeededRng& rng,
                                std::size_t dim = kPretrainedDim);
EmbeddingMatrix random_embeddings(const Vocabulary& vocab, std::size_t dim, SeededRng& rng);

struct EncodedUtterance {
  std::vector<std::size_t> ids;  // length n_max
  std::vector<bool> mask;        // true at the first `length` positions
  std::size_t length = 0;
};

// Unknown tokens map to <UNK>; longer inputs are truncated to n_max and
// shorter ones padded with <PAD>.
EncodedUtterance encode_utterance(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                  std::size_t n_max);

}  // namespace dicoh
