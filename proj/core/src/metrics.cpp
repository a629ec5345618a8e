#include "dicoh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dicoh/error.hpp"

namespace dicoh {

bool pair_correct(const ScoredPair& p) { return p.label == 0 ? p.s_a > p.s_b : p.s_b > p.s_a; }

AccuracyReport pairwise_accuracy(std::span<const ScoredPair> pairs) {
  if (pairs.empty()) throw PreconditionError("pairwise accuracy over an empty pair set");
  AccuracyReport r;
  r.pairs = pairs.size();
  for (const auto& p : pairs) r.correct += pair_correct(p) ? 1 : 0;
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.pairs);
  return r;
}

F1Report macro_f1(std::span<const int> predictions, std::span<const int> gold, std::size_t num_labels) {
  if (gold.empty() || predictions.size() != gold.size()) {
    throw PreconditionError("macro_f1 needs equal, nonzero numbers of predictions and labels");
  }
  std::vector<std::size_t> tp(num_labels, 0);
  F1Report r;
  r.examples = gold.size();
  r.per_label.resize(num_labels);
  auto check = [num_labels](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= num_labels) {
      throw DataError("label " + std::to_string(v) + " outside the label set");
    }
    return static_cast<std::size_t>(v);
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t g = check(gold[i]), p = check(predictions[i]);
    ++r.per_label[g].support;
    ++r.per_label[p].predicted;
    if (g == p) ++tp[g];
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < num_labels; ++k) {
    auto& s = r.per_label[k];
    const double t = static_cast<double>(tp[k]);
    s.precision = s.predicted ? t / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.support ? t / static_cast<double>(s.support) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    if (s.support || s.predicted) {
      sum += s.f1;
      ++present;
    }
  }
  r.macro_f1 = present ? sum / static_cast<double>(present) : 0.0;
  return r;
}

double majority_class_f1(std::span<const int> gold, std::size_t num_labels) {
  if (gold.empty()) throw PreconditionError("majority baseline over no labels");
  std::vector<std::size_t> counts(num_labels, 0);
  for (int g : gold) {
    if (g < 0 || static_cast<std::size_t>(g) >= num_labels) throw DataError("label outside the label set");
    ++counts[static_cast<std::size_t>(g)];
  }
  const int majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::vector<int> predictions(gold.size(), majority);
  return macro_f1(predictions, gold, num_labels).macro_f1;
}

RunSummary summarize_runs(std::span<const double> values) {
  if (values.size() < 2) throw PreconditionError("a mean and standard deviation need at least two runs");
  RunSummary s;
  s.runs = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.runs);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.runs - 1));
  return s;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string format_mean_std(const RunSummary& s) {
  std::string sd = format_percent(s.std);
  if (sd.rfind("0.", 0) == 0) sd.erase(0, 1);
  return format_percent(s.mean) + " ± " + sd;
}

namespace {

// Display width in code points, so "±" counts once.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

}  // namespace

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  };
  widen(header);
  for (const auto& r : rows) widen(r);
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < row.size() ? row[c] : "";
      const std::string pad(width[c] - display_width(cell), ' ');
      if (c) out += "  ";
      out += c == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace dicoh
