#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicoh::cli {

// Invalid command-line usage; mapped to exit code 2 together with
// ConfigError.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value settings. Later sources override earlier ones: built-in
// defaults, then the --config file, then explicit flags.
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();
  static RunConfig defaults();

  // Lines "key = value"; '#' starts a comment. Unknown keys throw ConfigError.
  void merge_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& str(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;

  // Writes the given keys (those that are set) in key order.
  void write(const std::filesystem::path& path, const std::vector<std::string>& keys) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dicoh::cli
