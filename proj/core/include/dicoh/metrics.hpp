#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dicoh {

struct ScoredPair {
  double s_a = 0.0;
  double s_b = 0.0;
  int label = 0;  // 0: a preferred, 1: b preferred
};

// The preferred dialogue must score strictly higher; ties are wrong.
bool pair_correct(const ScoredPair& pair);

struct AccuracyReport {
  std::string domain;
  std::string model;
  std::size_t pairs = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

AccuracyReport pairwise_accuracy(std::span<const ScoredPair> pairs);

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold occurrences
  std::size_t predicted = 0;  // predicted occurrences
};

struct F1Report {
  std::vector<LabelScores> per_label;
  double macro_f1 = 0.0;  // mean over labels occurring in gold or predictions
  std::size_t examples = 0;
};

// Precision, recall and F1 with 0/0 taken as 0.
F1Report macro_f1(std::span<const int> predictions, std::span<const int> gold, std::size_t num_labels);

// Macro-F1 of always predicting the most frequent gold label (lowest index
// on ties).
double majority_class_f1(std::span<const int> gold, std::size_t num_labels);

struct RunSummary {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation
  std::size_t runs = 0;
};

RunSummary summarize_runs(std::span<const double> values);

// Fractions rendered as percentages in the "95.92 ± .12" style.
std::string format_mean_std(const RunSummary& summary);
std::string format_percent(double fraction);

// Left-aligned first column, right-aligned cells, columns padded to fit.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace dicoh
