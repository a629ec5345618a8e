#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dicoh/autodiff.hpp"

namespace dicoh {

enum class Regime { SDiCoh, MDiCoh, SDap, MDap };

Regime parse_regime(std::string_view name);  // "s-dicoh", "m-dicoh", "s-dap", "m-dap"
std::string regime_name(Regime regime);
bool uses_coherence(Regime regime);
bool uses_dap(Regime regime);
bool is_dap_regime(Regime regime);  // model selection by DAP macro-F1

// Mean cross-entropy of gold labels under the given distributions.
double dap_loss(const std::vector<std::vector<double>>& predictions, const std::vector<int>& gold);
// Same quantity from an (m x |A|) matrix of log-probabilities.
Var dap_loss(const Var& log_probs, const std::vector<int>& gold);

// Hinge on the score margin; label 0 prefers s_i, label 1 prefers s_j.
double coherence_loss(double s_i, double s_j, int label);
Var coherence_loss(const Var& s_i, const Var& s_j, int label);

// l_coh / g1^2 + (l_da_i + l_da_j) / g2^2 + log g1 + log g2, g = exp(eta).
double total_loss(double l_coh, double l_da_i, double l_da_j, double eta1, double eta2);
Var total_loss(const Var& l_coh, const Var& l_da_i, const Var& l_da_j, const Var& eta1, const Var& eta2);

// Per-dialogue mean DAP cross-entropy over a column of gold log-probabilities
// laid out dialogue by dialogue (offsets has one entry per dialogue plus n).
Var segment_dap_losses(const Var& log_probs, const std::vector<int>& gold, const std::vector<std::size_t>& offsets);

// Per-pair hinge losses from a score column. preferred/other index rows.
Var pair_hinge_losses(const Var& scores, const std::vector<std::size_t>& preferred,
                      const std::vector<std::size_t>& other);

}  // namespace dicoh
