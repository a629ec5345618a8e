#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dicoh/dialogue.hpp"
#include "dicoh/rng.hpp"

namespace dicoh {

enum class Domain { UO, UI, UR, EUO };

inline constexpr Domain kAllDomains[] = {Domain::UO, Domain::UI, Domain::UR, Domain::EUO};

Domain parse_domain(std::string_view name);  // "uo", "ui", "ur", "euo"
std::string domain_name(Domain domain);

// Seeded description of one transformation of a source dialogue. Only the
// fields of the given kind are meaningful.
struct PerturbationSpec {
  Domain kind = Domain::UO;
  std::string source_id;
  std::uint64_t seed = 0;

  // UO: result[k] = source[permutation[k]] over all positions.
  // EUO: result[positions[k]] = source[positions[permutation[k]]], where
  // positions are the chosen speaker's slots in order.
  std::vector<std::size_t> permutation;
  int speaker = -1;

  // UI: the utterance at removed_index is taken out and reinserted so that
  // it ends up at reinsert_index.
  std::size_t removed_index = 0;
  std::size_t reinsert_index = 0;

  // UR
  std::size_t replaced_index = 0;
  std::string donor_dialogue_id;
  std::size_t donor_utterance_index = 0;
  std::string donor_utterance;
  int donor_label = -1;

  bool operator==(const PerturbationSpec&) const = default;
};

// Each generator returns nullopt when the dialogue cannot be perturbed in a
// way that changes its utterance sequence.
std::optional<PerturbationSpec> perturb_uo(const Dialogue& dialogue, SeededRng& rng);
std::optional<PerturbationSpec> perturb_ui(const Dialogue& dialogue, SeededRng& rng);
// Donors come from `corpus`, which must hold at least two dialogues.
std::optional<PerturbationSpec> perturb_ur(const Dialogue& dialogue, std::span<const Dialogue> corpus, SeededRng& rng);
std::optional<PerturbationSpec> perturb_euo(const Dialogue& dialogue, SeededRng& rng);

std::optional<PerturbationSpec> perturb(Domain domain, const Dialogue& dialogue, std::span<const Dialogue> corpus,
                                        SeededRng& rng);

// Applies a spec to its source. Labels and speakers move with utterances;
// a replaced utterance keeps the slot's speaker and takes the donor's label.
Dialogue apply_perturbation(const PerturbationSpec& spec, const Dialogue& source);

// Every distinct perturbed utterance sequence reachable from `dialogue`,
// one spec each, in a deterministic order. Empty when the space is too large
// to enumerate (UO and EUO beyond 7 permuted slots; UR always).
std::optional<std::vector<PerturbationSpec>> enumerate_perturbations(Domain domain, const Dialogue& dialogue);

// Up to `count` perturbations of `dialogue` with pairwise distinct results:
// the whole space when it holds no more than `count`, otherwise a uniform
// sample from it.
std::vector<PerturbationSpec> distinct_perturbations(Domain domain, const Dialogue& dialogue,
                                                     std::span<const Dialogue> corpus, std::size_t count,
                                                     SeededRng& rng);

}  // namespace dicoh
