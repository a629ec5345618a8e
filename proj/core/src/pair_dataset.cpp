#include "dicoh/pair_dataset.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dicoh/corpus.hpp"
#include "dicoh/error.hpp"
#include "dicoh/rng.hpp"

namespace dicoh {
namespace {

using json = nlohmann::json;

json spec_to_json(const PerturbationSpec& s) {
  json j{{"kind", domain_name(s.kind)}, {"source_dialogue_id", s.source_id}, {"seed", s.seed}};
  switch (s.kind) {
    case Domain::UO:
      j["permutation"] = s.permutation;
      break;
    case Domain::EUO:
      j["speaker"] = s.speaker;
      j["permutation"] = s.permutation;
      break;
    case Domain::UI:
      j["removed_index"] = s.removed_index;
      j["reinsert_index"] = s.reinsert_index;
      break;
    case Domain::UR:
      j["replaced_index"] = s.replaced_index;
      j["donor_dialogue_id"] = s.donor_dialogue_id;
      j["donor_utterance_index"] = s.donor_utterance_index;
      j["donor_utterance"] = s.donor_utterance;
      j["donor_label"] = s.donor_label;
      break;
  }
  return j;
}

PerturbationSpec spec_from_json(const json& j) {
  PerturbationSpec s;
  s.kind = parse_domain(j.at("kind").get<std::string>());
  s.source_id = j.at("source_dialogue_id").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  switch (s.kind) {
    case Domain::UO:
      s.permutation = j.at("permutation").get<std::vector<std::size_t>>();
      break;
    case Domain::EUO:
      s.speaker = j.at("speaker").get<int>();
      s.permutation = j.at("permutation").get<std::vector<std::size_t>>();
      break;
    case Domain::UI:
      s.removed_index = j.at("removed_index").get<std::size_t>();
      s.reinsert_index = j.at("reinsert_index").get<std::size_t>();
      break;
    case Domain::UR:
      s.replaced_index = j.at("replaced_index").get<std::size_t>();
      s.donor_dialogue_id = j.at("donor_dialogue_id").get<std::string>();
      s.donor_utterance_index = j.at("donor_utterance_index").get<std::size_t>();
      s.donor_utterance = j.at("donor_utterance").get<std::string>();
      s.donor_label = j.at("donor_label").get<int>();
      break;
  }
  return s;
}

json side_to_json(const PairSide& side) {
  json j = json::parse(to_canonical_line(*side.dialogue));
  if (side.perturbation) j["perturbation"] = spec_to_json(*side.perturbation);
  return j;
}

class DialogueInterner {
 public:
  std::shared_ptr<const Dialogue> intern(Dialogue d) {
    auto& bucket = by_id_[d.id];
    for (const auto& existing : bucket) {
      if (*existing == d) return existing;
    }
    bucket.push_back(std::make_shared<const Dialogue>(std::move(d)));
    return bucket.back();
  }

 private:
  std::map<std::string, std::vector<std::shared_ptr<const Dialogue>>> by_id_;
};

PairSide side_from_json(const json& j, DialogueInterner& interner, std::size_t line) {
  json body = j;
  PairSide side;
  if (body.contains("perturbation")) {
    side.perturbation = spec_from_json(body.at("perturbation"));
    body.erase("perturbation");
  }
  side.dialogue = interner.intern(from_canonical_line(body.dump(), line));
  return side;
}

}  // namespace

std::uint64_t dialogue_seed(std::uint64_t seed, const std::string& dialogue_id, Domain domain) {
  return mix_seed(mix_seed(seed, hash_string(dialogue_id)), static_cast<std::uint64_t>(domain) + 1);
}

PairDataset build_pair_dataset(std::span<const Dialogue> split, Domain domain, std::size_t per_dialogue,
                               std::uint64_t seed) {
  if (split.empty()) throw PreconditionError("cannot build pairs from an empty split");
  PairDataset out;
  out.dialogues = split.size();
  const std::string tag = domain_name(domain);
  for (const Dialogue& d : split) {
    d.validate();
    SeededRng rng(dialogue_seed(seed, d.id, domain));
    const auto specs = distinct_perturbations(domain, d, split, per_dialogue, rng);
    if (specs.empty()) {
      out.skipped.push_back(d.id);
      continue;
    }
    auto original = std::make_shared<const Dialogue>(d);
    for (std::size_t k = 0; k < specs.size(); ++k) {
      Dialogue p = apply_perturbation(specs[k], d);
      p.id = d.id + "#" + tag + "-" + std::to_string(k);
      auto perturbed = std::make_shared<const Dialogue>(std::move(p));
      const PairSide orig_side{original, std::nullopt};
      const PairSide pert_side{perturbed, specs[k]};
      out.pairs.push_back({perturbed->id + "/0", domain, 0, orig_side, pert_side});
      out.pairs.push_back({perturbed->id + "/1", domain, 1, pert_side, orig_side});
    }
    out.perturbations += specs.size();
  }
  return out;
}

void write_pairs(const std::filesystem::path& path, const std::vector<DialoguePair>& pairs) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& p : pairs) {
    json j{{"pair_id", p.pair_id},
           {"problem_domain", domain_name(p.domain)},
           {"label", p.label},
           {"dial_a", side_to_json(p.a)},
           {"dial_b", side_to_json(p.b)}};
    out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<DialoguePair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<DialoguePair> pairs;
  DialogueInterner interner;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      DialoguePair p;
      p.pair_id = j.at("pair_id").get<std::string>();
      p.domain = parse_domain(j.at("problem_domain").get<std::string>());
      p.label = j.at("label").get<int>();
      if (p.label != 0 && p.label != 1) throw ParseError("label must be 0 or 1", line_no);
      p.a = side_from_json(j.at("dial_a"), interner, line_no);
      p.b = side_from_json(j.at("dial_b"), interner, line_no);
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": malformed pair record: " + e.what(), line_no);
    } catch (const ConfigError& e) {
      throw ParseError(path.string() + ": " + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<std::shared_ptr<const Dialogue>> original_dialogues(const std::vector<DialoguePair>& pairs) {
  std::vector<std::shared_ptr<const Dialogue>> out;
  std::set<const Dialogue*> seen;
  for (const auto& p : pairs) {
    const auto& d = p.original().dialogue;
    if (seen.insert(d.get()).second) out.push_back(d);
  }
  return out;
}

}  // namespace dicoh
