#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dicoh {

inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kUnkToken = "<UNK>";

// Lowercases, splits on whitespace and peels the punctuation characters
// . , ! ? ' ; : " ( ) off both ends of every chunk as separate tokens.
// Input without any non-whitespace character yields {"<UNK>"}.
std::vector<std::string> tokenize(std::string_view text);

// True when the token contains at least one ASCII letter or digit, or any
// non-ASCII byte. Used for word counts.
bool is_word_token(std::string_view token);

}  // namespace dicoh
