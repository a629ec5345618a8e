#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dicoh {

// A dialogue as an ordered list of utterances. Speaker indices and dialogue
// act labels travel with their utterances; da_labels is empty when the
// source carries no labels.
struct Dialogue {
  std::string id;
  std::vector<std::string> utterances;
  std::vector<int> speakers;
  std::vector<int> da_labels;

  std::size_t size() const { return utterances.size(); }
  bool has_labels() const { return !da_labels.empty(); }
  // Throws DataError when the parallel lists disagree in length or the
  // dialogue is empty.
  void validate() const;

  bool operator==(const Dialogue&) const = default;
};

// Names of the dialogue act labels; label index = position.
struct LabelSet {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  // {Inform, Question, Directive, Commissive}
  static LabelSet dailydialog();
};

}  // namespace dicoh
