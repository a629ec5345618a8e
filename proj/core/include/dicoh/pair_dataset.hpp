#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dicoh/dialogue.hpp"
#include "dicoh/perturbations.hpp"

namespace dicoh {

struct PairSide {
  std::shared_ptr<const Dialogue> dialogue;
  std::optional<PerturbationSpec> perturbation;  // set on the perturbed side only
};

// label 0: dial_a is preferred (the original); label 1: dial_b is.
struct DialoguePair {
  std::string pair_id;
  Domain domain = Domain::UO;
  int label = 0;
  PairSide a;
  PairSide b;

  const PairSide& original() const { return label == 0 ? a : b; }
  const PairSide& perturbed() const { return label == 0 ? b : a; }
};

struct PairDataset {
  std::vector<DialoguePair> pairs;
  std::size_t dialogues = 0;
  std::size_t perturbations = 0;
  std::vector<std::string> skipped;  // ids of dialogues with no valid perturbation
};

inline constexpr std::size_t kPerturbationsPerDialogue = 20;

// For every dialogue, up to `per_dialogue` distinct perturbations, each
// emitted as (original, perturbed, 0) then (perturbed, original, 1).
// Per-dialogue randomness derives from (seed, dialogue id, domain).
PairDataset build_pair_dataset(std::span<const Dialogue> split, Domain domain,
                               std::size_t per_dialogue = kPerturbationsPerDialogue, std::uint64_t seed = 0);

std::uint64_t dialogue_seed(std::uint64_t seed, const std::string& dialogue_id, Domain domain);

// Line-delimited JSON: {pair_id, problem_domain, label, dial_a, dial_b}.
void write_pairs(const std::filesystem::path& path, const std::vector<DialoguePair>& pairs);
// Identical dialogues are shared between the pairs that use them.
std::vector<DialoguePair> read_pairs(const std::filesystem::path& path);

// Distinct unperturbed dialogues in first-seen order.
std::vector<std::shared_ptr<const Dialogue>> original_dialogues(const std::vector<DialoguePair>& pairs);

}  // namespace dicoh
