#include "dicoh/perturbations.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dicoh/error.hpp"

namespace dicoh {
namespace {

constexpr std::size_t kMaxEnumeratedSlots = 7;
constexpr std::size_t kDonorAttempts = 100;
constexpr std::size_t kSampleAttemptsPerPerturbation = 50;

bool all_same_text(const Dialogue& d, const std::vector<std::size_t>& positions) {
  for (std::size_t p : positions) {
    if (d.utterances[p] != d.utterances[positions.front()]) return false;
  }
  return true;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Text at each position after moving `removed` so that it lands on `reinsert`.
std::vector<std::size_t> insertion_order(std::size_t m, std::size_t removed, std::size_t reinsert) {
  std::vector<std::size_t> order = iota(m);
  order.erase(order.begin() + static_cast<std::ptrdiff_t>(removed));
  order.insert(order.begin() + static_cast<std::ptrdiff_t>(reinsert), removed);
  return order;
}

bool order_changes_text(const Dialogue& d, const std::vector<std::size_t>& order) {
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (d.utterances[order[k]] != d.utterances[k]) return true;
  }
  return false;
}

std::map<int, std::vector<std::size_t>> positions_by_speaker(const Dialogue& d) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < d.size(); ++k) out[d.speakers[k]].push_back(k);
  return out;
}

std::vector<int> euo_speakers(const Dialogue& d, const std::map<int, std::vector<std::size_t>>& by_speaker) {
  std::vector<int> eligible;
  for (const auto& [speaker, positions] : by_speaker) {
    if (positions.size() >= 2 && !all_same_text(d, positions)) eligible.push_back(speaker);
  }
  return eligible;
}

// Full-length order equivalent to permuting one speaker's slots.
std::vector<std::size_t> speaker_order(std::size_t m, const std::vector<std::size_t>& positions,
                                       const std::vector<std::size_t>& permutation) {
  std::vector<std::size_t> order = iota(m);
  for (std::size_t k = 0; k < positions.size(); ++k) order[positions[k]] = positions[permutation[k]];
  return order;
}

PerturbationSpec base_spec(Domain kind, const Dialogue& d, std::uint64_t seed) {
  PerturbationSpec spec;
  spec.kind = kind;
  spec.source_id = d.id;
  spec.seed = seed;
  return spec;
}

void check_permutation(const std::vector<std::size_t>& perm, std::size_t n, const char* what) {
  std::vector<bool> seen(n, false);
  if (perm.size() != n) throw PreconditionError(std::string(what) + ": permutation has the wrong length");
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw PreconditionError(std::string(what) + ": not a permutation");
    seen[p] = true;
  }
}

Dialogue reorder(const Dialogue& source, const std::vector<std::size_t>& order) {
  Dialogue out;
  out.id = source.id;
  for (std::size_t k : order) {
    out.utterances.push_back(source.utterances[k]);
    out.speakers.push_back(source.speakers[k]);
    if (source.has_labels()) out.da_labels.push_back(source.da_labels[k]);
  }
  return out;
}

}  // namespace

Domain parse_domain(std::string_view name) {
  if (name == "uo") return Domain::UO;
  if (name == "ui") return Domain::UI;
  if (name == "ur") return Domain::UR;
  if (name == "euo") return Domain::EUO;
  throw ConfigError("unknown problem domain '" + std::string(name) + "' (expected uo, ui, ur or euo)");
}

std::string domain_name(Domain domain) {
  switch (domain) {
    case Domain::UO: return "uo";
    case Domain::UI: return "ui";
    case Domain::UR: return "ur";
    case Domain::EUO: return "euo";
  }
  return "?";
}

std::optional<PerturbationSpec> perturb_uo(const Dialogue& d, SeededRng& rng) {
  if (d.size() < 2 || all_same_text(d, iota(d.size()))) return std::nullopt;
  PerturbationSpec spec = base_spec(Domain::UO, d, rng.seed());
  std::vector<std::size_t> order = iota(d.size());
  do {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
  } while (!order_changes_text(d, order));
  spec.permutation = std::move(order);
  return spec;
}

std::optional<PerturbationSpec> perturb_ui(const Dialogue& d, SeededRng& rng) {
  const std::size_t m = d.size();
  if (m < 2 || all_same_text(d, iota(m))) return std::nullopt;
  PerturbationSpec spec = base_spec(Domain::UI, d, rng.seed());
  for (;;) {
    const std::size_t removed = rng.index(m);
    std::size_t reinsert = rng.index(m - 1);
    if (reinsert >= removed) ++reinsert;
    if (order_changes_text(d, insertion_order(m, removed, reinsert))) {
      spec.removed_index = removed;
      spec.reinsert_index = reinsert;
      return spec;
    }
  }
}

std::optional<PerturbationSpec> perturb_ur(const Dialogue& d, std::span<const Dialogue> corpus, SeededRng& rng) {
  if (corpus.size() < 2) throw PreconditionError("utterance replacement needs a corpus of at least two dialogues");
  if (d.size() == 0) return std::nullopt;
  const bool any_donor = std::any_of(corpus.begin(), corpus.end(), [&](const Dialogue& c) { return c.id != d.id; });
  if (!any_donor) return std::nullopt;
  PerturbationSpec spec = base_spec(Domain::UR, d, rng.seed());
  spec.replaced_index = rng.index(d.size());
  for (std::size_t attempt = 0; attempt < kDonorAttempts; ++attempt) {
    const Dialogue* donor = nullptr;
    do {
      donor = &corpus[rng.index(corpus.size())];
    } while (donor->id == d.id);
    const std::size_t u = rng.index(donor->size());
    if (donor->utterances[u] == d.utterances[spec.replaced_index]) continue;
    spec.donor_dialogue_id = donor->id;
    spec.donor_utterance_index = u;
    spec.donor_utterance = donor->utterances[u];
    spec.donor_label = donor->has_labels() ? donor->da_labels[u] : -1;
    return spec;
  }
  return std::nullopt;
}

std::optional<PerturbationSpec> perturb_euo(const Dialogue& d, SeededRng& rng) {
  const auto by_speaker = positions_by_speaker(d);
  const std::vector<int> eligible = euo_speakers(d, by_speaker);
  if (eligible.empty()) return std::nullopt;
  PerturbationSpec spec = base_spec(Domain::EUO, d, rng.seed());
  spec.speaker = eligible[rng.index(eligible.size())];
  const auto& positions = by_speaker.at(spec.speaker);
  std::vector<std::size_t> perm(positions.size());
  do {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm.begin(), perm.end());
  } while (!order_changes_text(d, speaker_order(d.size(), positions, perm)));
  spec.permutation = std::move(perm);
  return spec;
}

std::optional<PerturbationSpec> perturb(Domain domain, const Dialogue& d, std::span<const Dialogue> corpus,
                                        SeededRng& rng) {
  switch (domain) {
    case Domain::UO: return perturb_uo(d, rng);
    case Domain::UI: return perturb_ui(d, rng);
    case Domain::UR: return perturb_ur(d, corpus, rng);
    case Domain::EUO: return perturb_euo(d, rng);
  }
  return std::nullopt;
}

Dialogue apply_perturbation(const PerturbationSpec& spec, const Dialogue& source) {
  const std::size_t m = source.size();
  switch (spec.kind) {
    case Domain::UO:
      check_permutation(spec.permutation, m, "UO");
      return reorder(source, spec.permutation);
    case Domain::UI:
      if (spec.removed_index >= m || spec.reinsert_index >= m || spec.removed_index == spec.reinsert_index) {
        throw PreconditionError("UI: invalid removal/reinsertion positions");
      }
      return reorder(source, insertion_order(m, spec.removed_index, spec.reinsert_index));
    case Domain::EUO: {
      const auto by_speaker = positions_by_speaker(source);
      auto it = by_speaker.find(spec.speaker);
      if (it == by_speaker.end()) throw PreconditionError("EUO: speaker not present in the dialogue");
      check_permutation(spec.permutation, it->second.size(), "EUO");
      return reorder(source, speaker_order(m, it->second, spec.permutation));
    }
    case Domain::UR: {
      if (spec.replaced_index >= m) throw PreconditionError("UR: replaced position out of range");
      Dialogue out = source;
      out.utterances[spec.replaced_index] = spec.donor_utterance;
      if (out.has_labels()) {
        if (spec.donor_label < 0) throw DataError("UR: donor utterance carries no dialogue act label");
        out.da_labels[spec.replaced_index] = spec.donor_label;
      }
      return out;
    }
  }
  throw PreconditionError("unknown perturbation kind");
}

std::optional<std::vector<PerturbationSpec>> enumerate_perturbations(Domain domain, const Dialogue& d) {
  const std::size_t m = d.size();
  std::vector<PerturbationSpec> out;
  std::set<std::vector<std::string>> seen_texts;
  seen_texts.insert(d.utterances);
  auto admit = [&](const std::vector<std::size_t>& order) {
    std::vector<std::string> texts;
    texts.reserve(order.size());
    for (std::size_t k : order) texts.push_back(d.utterances[k]);
    return seen_texts.insert(std::move(texts)).second;
  };

  switch (domain) {
    case Domain::UR:
      return std::nullopt;
    case Domain::UO: {
      if (m > kMaxEnumeratedSlots) return std::nullopt;
      std::vector<std::size_t> perm = iota(m);
      while (std::next_permutation(perm.begin(), perm.end())) {
        if (!admit(perm)) continue;
        PerturbationSpec spec = base_spec(Domain::UO, d, 0);
        spec.permutation = perm;
        out.push_back(std::move(spec));
      }
      return out;
    }
    case Domain::UI: {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          if (i == j || !admit(insertion_order(m, i, j))) continue;
          PerturbationSpec spec = base_spec(Domain::UI, d, 0);
          spec.removed_index = i;
          spec.reinsert_index = j;
          out.push_back(std::move(spec));
        }
      }
      return out;
    }
    case Domain::EUO: {
      const auto by_speaker = positions_by_speaker(d);
      for (const auto& [speaker, positions] : by_speaker) {
        if (positions.size() > kMaxEnumeratedSlots) return std::nullopt;
      }
      for (int speaker : euo_speakers(d, by_speaker)) {
        const auto& positions = by_speaker.at(speaker);
        std::vector<std::size_t> perm = iota(positions.size());
        while (std::next_permutation(perm.begin(), perm.end())) {
          if (!admit(speaker_order(m, positions, perm))) continue;
          PerturbationSpec spec = base_spec(Domain::EUO, d, 0);
          spec.speaker = speaker;
          spec.permutation = perm;
          out.push_back(std::move(spec));
        }
      }
      return out;
    }
  }
  return std::nullopt;
}

std::vector<PerturbationSpec> distinct_perturbations(Domain domain, const Dialogue& d, std::span<const Dialogue> corpus,
                                                     std::size_t count, SeededRng& rng) {
  if (auto all = enumerate_perturbations(domain, d)) {
    std::vector<PerturbationSpec> specs = std::move(*all);
    if (specs.size() > count) {
      rng.shuffle(specs.begin(), specs.end());
      specs.resize(count);
    }
    for (auto& s : specs) s.seed = rng.seed();
    return specs;
  }

  std::vector<PerturbationSpec> specs;
  std::set<std::vector<std::string>> seen{d.utterances};
  const std::size_t attempts = count * kSampleAttemptsPerPerturbation;
  for (std::size_t a = 0; a < attempts && specs.size() < count; ++a) {
    auto spec = perturb(domain, d, corpus, rng);
    if (!spec) break;
    if (seen.insert(apply_perturbation(*spec, d).utterances).second) specs.push_back(std::move(*spec));
  }
  return specs;
}

}  // namespace dicoh
