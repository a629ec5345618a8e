#include "dicoh/embeddings.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dicoh/error.hpp"

namespace dicoh {

const double* PretrainedVectors::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : data_.data() + it->second * dim_;
}

void PretrainedVectors::add(const std::string& token, const std::vector<double>& v) {
  if (v.size() != dim_) throw DimensionError("vector for '" + token + "' has the wrong width");
  auto [it, inserted] = index_.emplace(token, index_.size());
  if (!inserted) {
    std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    return;
  }
  data_.insert(data_.end(), v.begin(), v.end());
}

PretrainedVectors PretrainedVectors::load(const std::filesystem::path& path, std::size_t dim, const Vocabulary* keep) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open embeddings file " + path.string());
  PretrainedVectors out(dim);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  std::vector<double> values;
  values.reserve(dim);
  while (std::getline(is, line)) {
    ++lineno;
    const char* p = line.c_str();
    while (*p == ' ' || *p == '\t') ++p;
    if (*p == '\0' || *p == '\r') continue;
    const char* tok_end = p;
    while (*tok_end && *tok_end != ' ' && *tok_end != '\t') ++tok_end;
    std::string token(p, tok_end);
    values.clear();
    const char* q = tok_end;
    while (true) {
      while (*q == ' ' || *q == '\t' || *q == '\r') ++q;
      if (!*q) break;
      char* end = nullptr;
      errno = 0;
      double v = std::strtod(q, &end);
      if (end == q || (*end && *end != ' ' && *end != '\t' && *end != '\r')) {
        throw ParseError(path.string() + ": malformed number for token '" + token + "'", lineno);
      }
      values.push_back(v);
      q = end;
    }
    if (first) {
      first = false;
      if (values.size() != dim) {
        throw ConfigError(path.string() + ": vectors have dimension " + std::to_string(values.size()) +
                          ", expected " + std::to_string(dim));
      }
    } else if (values.size() != dim) {
      throw ParseError(path.string() + ": expected " + std::to_string(dim) + " values for token '" + token +
                           "', found " + std::to_string(values.size()),
                       lineno);
    }
    if (keep && !keep->contains(token)) continue;
    out.add(token, values);
  }
  return out;
}

EmbeddingMatrix embeddings_from_vectors(const PretrainedVectors& vectors, const Vocabulary& vocab, SeededRng& rng) {
  const std::size_t dim = vectors.dim();
  EmbeddingMatrix e;
  e.matrix = Tensor({vocab.size(), dim});
  std::size_t found = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    double* row = e.matrix.data() + i * dim;
    if (i == Vocabulary::kPad) continue;
    const double* v = i == Vocabulary::kUnk ? nullptr : vectors.find(vocab.token(i));
    if (v) {
      std::copy(v, v + dim, row);
      ++found;
    } else {
      for (std::size_t j = 0; j < dim; ++j) row[j] = rng.uniform(-0.05, 0.05);
    }
  }
  const std::size_t regular = vocab.size() - 2;
  e.coverage = regular ? static_cast<double>(found) / static_cast<double>(regular) : 1.0;
  return e;
}

EmbeddingMatrix load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab, SeededRng& rng,
                                std::size_t dim) {
  return embeddings_from_vectors(PretrainedVectors::load(path, dim, &vocab), vocab, rng);
}

EmbeddingMatrix random_embeddings(const Vocabulary& vocab, std::size_t dim, SeededRng& rng) {
  return embeddings_from_vectors(PretrainedVectors(dim), vocab, rng);
}

EncodedUtterance encode_utterance(const std::vector<std::string>& tokens, const Vocabulary& vocab, std::size_t n_max) {
  if (n_max == 0) throw PreconditionError("n_max must be at least 1");
  EncodedUtterance u;
  u.length = std::min(tokens.size(), n_max);
  u.ids.assign(n_max, Vocabulary::kPad);
  u.mask.assign(n_max, false);
  for (std::size_t i = 0; i < u.length; ++i) {
    u.ids[i] = vocab.index(tokens[i]);
    u.mask[i] = true;
  }
  return u;
}

}  // namespace dicoh
