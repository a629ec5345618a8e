#include "dicoh/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dicoh/error.hpp"
#include "dicoh/tokenizer.hpp"

namespace dicoh {

extern const char* const kSmartStopwords;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<double> utterance_vector(const std::string& text, const PretrainedVectors& vectors,
                                     const StopwordList& stopwords) {
  std::vector<double> v(vectors.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& token : tokenize(text)) {
    if (!is_word_token(token) || stopwords.contains(token)) continue;
    const double* row = vectors.find(token);
    if (!row) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += row[j];
    ++n;
  }
  if (n) {
    for (double& x : v) x /= static_cast<double>(n);
  }
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

int random_rank(SeededRng& rng) { return rng.bernoulli(0.5) ? 1 : 0; }

StopwordList StopwordList::from_text(const std::string& text) {
  StopwordList list;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string w;
    if (!(words >> w) || w[0] == '#') continue;
    list.words_.insert(lower(w));
  }
  return list;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword list " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

const StopwordList& StopwordList::smart() {
  static const StopwordList list = from_text(kSmartStopwords);
  return list;
}

bool StopwordList::contains(const std::string& token) const { return words_.count(lower(token)) != 0; }

double cosim_score(const Dialogue& dialogue, const PretrainedVectors& vectors, const StopwordList& stopwords) {
  if (dialogue.size() < 2) return 0.0;
  std::vector<std::vector<double>> u;
  u.reserve(dialogue.size());
  for (const auto& text : dialogue.utterances) u.push_back(utterance_vector(text, vectors, stopwords));
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) sum += cosine(u[k], u[k + 1]);
  return sum / static_cast<double>(u.size() - 1);
}

}  // namespace dicoh
