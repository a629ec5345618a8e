#include "dicoh/dialogue.hpp"

#include "dicoh/error.hpp"

namespace dicoh {

void Dialogue::validate() const {
  if (utterances.empty()) throw DataError("dialogue '" + id + "' has no utterances");
  if (speakers.size() != utterances.size()) {
    throw DataError("dialogue '" + id + "': " + std::to_string(speakers.size()) + " speakers for " +
                    std::to_string(utterances.size()) + " utterances");
  }
  if (!da_labels.empty() && da_labels.size() != utterances.size()) {
    throw DataError("dialogue '" + id + "': " + std::to_string(da_labels.size()) + " labels for " +
                    std::to_string(utterances.size()) + " utterances");
  }
}

LabelSet LabelSet::dailydialog() { return LabelSet{{"inform", "question", "directive", "commissive"}}; }

}  // namespace dicoh
