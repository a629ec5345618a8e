#include "dicoh/losses.hpp"

#include <cmath>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

void check_label(int label, std::size_t labels, std::size_t position) {
  if (label < 0 || static_cast<std::size_t>(label) >= labels) {
    throw DataError("dialogue act label " + std::to_string(label) + " out of range at utterance " +
                    std::to_string(position));
  }
}

void check_preference(int label) {
  if (label != 0 && label != 1) throw PreconditionError("preference label must be 0 or 1, got " + std::to_string(label));
}

}  // namespace

Regime parse_regime(std::string_view name) {
  if (name == "s-dicoh") return Regime::SDiCoh;
  if (name == "m-dicoh") return Regime::MDiCoh;
  if (name == "s-dap") return Regime::SDap;
  if (name == "m-dap") return Regime::MDap;
  throw ConfigError("unknown regime '" + std::string(name) + "' (expected s-dicoh, m-dicoh, s-dap or m-dap)");
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::SDiCoh: return "s-dicoh";
    case Regime::MDiCoh: return "m-dicoh";
    case Regime::SDap: return "s-dap";
    case Regime::MDap: return "m-dap";
  }
  return "?";
}

bool uses_coherence(Regime r) { return r != Regime::SDap; }
bool uses_dap(Regime r) { return r != Regime::SDiCoh; }
bool is_dap_regime(Regime r) { return r == Regime::SDap || r == Regime::MDap; }

double dap_loss(const std::vector<std::vector<double>>& predictions, const std::vector<int>& gold) {
  if (predictions.empty() || predictions.size() != gold.size()) {
    throw PreconditionError("dap_loss needs equal, nonzero numbers of predictions and labels");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    check_label(gold[k], predictions[k].size(), k);
    total += std::log(predictions[k][static_cast<std::size_t>(gold[k])]);
  }
  return -total / static_cast<double>(gold.size());
}

Var dap_loss(const Var& log_probs, const std::vector<int>& gold) {
  return ops::mean(segment_dap_losses(log_probs, gold, {0, gold.size()}));
}

Var segment_dap_losses(const Var& log_probs, const std::vector<int>& gold, const std::vector<std::size_t>& offsets) {
  if (gold.empty() || gold.size() != log_probs.rows()) {
    throw PreconditionError("dap loss needs one label per prediction row (" + std::to_string(gold.size()) + " vs " +
                            std::to_string(log_probs.rows()) + ")");
  }
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(gold.size());
  for (std::size_t k = 0; k < gold.size(); ++k) {
    check_label(gold[k], log_probs.cols(), k);
    cells.emplace_back(k, static_cast<std::size_t>(gold[k]));
  }
  Tensor weights({gold.size(), 1});
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t m = offsets[s + 1] - offsets[s];
    if (m == 0) throw PreconditionError("dap loss over an empty dialogue");
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) weights[r] = -1.0 / static_cast<double>(m);
  }
  Var picked = ops::pick(log_probs, std::move(cells));
  return ops::segment_weighted_sum(log_probs.tape().constant(std::move(weights)), picked, offsets);
}

double coherence_loss(double s_i, double s_j, int label) {
  check_preference(label);
  const double preferred = label == 0 ? s_i : s_j;
  const double other = label == 0 ? s_j : s_i;
  return std::max(0.0, (other - preferred) + 1.0);
}

Var coherence_loss(const Var& s_i, const Var& s_j, int label) {
  check_preference(label);
  const Var& preferred = label == 0 ? s_i : s_j;
  const Var& other = label == 0 ? s_j : s_i;
  return ops::relu(ops::add_scalar(ops::sub(other, preferred), 1.0));
}

Var pair_hinge_losses(const Var& scores, const std::vector<std::size_t>& preferred,
                      const std::vector<std::size_t>& other) {
  Var p = ops::gather_rows(scores, preferred);
  Var o = ops::gather_rows(scores, other);
  return ops::relu(ops::add_scalar(ops::sub(o, p), 1.0));
}

double total_loss(double l_coh, double l_da_i, double l_da_j, double eta1, double eta2) {
  const double g1 = std::exp(eta1), g2 = std::exp(eta2);
  return l_coh / (g1 * g1) + (l_da_i + l_da_j) / (g2 * g2) + std::log(g1) + std::log(g2);
}

Var total_loss(const Var& l_coh, const Var& l_da_i, const Var& l_da_j, const Var& eta1, const Var& eta2) {
  Var g1 = ops::exp(eta1);
  Var g2 = ops::exp(eta2);
  Var coh = ops::div(l_coh, ops::mul(g1, g1));
  Var dap = ops::div(ops::add(l_da_i, l_da_j), ops::mul(g2, g2));
  return ops::add(ops::add(coh, dap), ops::add(ops::log(g1), ops::log(g2)));
}

}  // namespace dicoh
