#include "run_config.hpp"

#include <algorithm>
#include <fstream>

#include "dicoh/error.hpp"

namespace dicoh::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "acts",        "batch_size",  "checkpoint", "corpus",     "dap_after_dropout",
      "data_root",   "dial_hidden", "dialogue",   "domain",     "dropout",
      "embed_dim",   "embeddings",  "epochs",     "input",      "lr",
      "max_dialogues", "model",     "n_max",      "out",        "pairs",
      "per_dialogue", "regime",     "seed",       "seeds",      "split",
      "stopwords",   "trainable_embeddings", "utt_hidden",
  };
  return keys;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.values_ = {
      {"batch_size", "128"}, {"dap_after_dropout", "false"}, {"dial_hidden", "256"}, {"domain", "uo"},
      {"dropout", "0.1"},    {"embed_dim", "300"},           {"epochs", "20"},      {"lr", "0.0005"},
      {"model", "dicoh"},    {"n_max", "40"},                {"per_dialogue", "20"}, {"regime", "m-dicoh"},
      {"seed", "0"},         {"seeds", "1"},                 {"split", "test"},     {"trainable_embeddings", "true"},
      {"utt_hidden", "128"},
  };
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing required setting '" + key + "'");
  return it->second;
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& v = str(key);
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-') {
    throw ConfigError("setting '" + key + "' must be a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::size_t RunConfig::size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

double RunConfig::real(const std::string& key) const {
  const std::string& v = str(key);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("setting '" + key + "' must be a number, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("setting '" + key + "' must be true or false, got '" + v + "'");
}

void RunConfig::write(const std::filesystem::path& path, const std::vector<std::string>& keys) const {
  std::vector<std::string> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& k : sorted) {
    if (auto it = values_.find(k); it != values_.end()) out << k << " = " << it->second << '\n';
  }
}

}  // namespace dicoh::cli
