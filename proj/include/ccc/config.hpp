#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ccc/trainer.hpp"

namespace ccc {

// Flat `key = value` text; `#` starts a comment, values may be double-quoted.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<memory>");
  static KeyValueConfig read(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }
  const std::string& origin() const { return origin_; }
  std::string serialize() const;

 private:
  std::string origin_;
  std::map<std::string, std::string, std::less<>> values_;
};

// Recognized keys: epochs, seed, fold_count, batch_size, learning_rate,
// convergence_window, fit_tolerance, fit_max_iterations, slack (absorb|forbid),
// restarts.
// Unknown keys are rejected.
TrainConfig train_config_from(const KeyValueConfig& config, TrainConfig defaults = {});
KeyValueConfig to_key_values(const TrainConfig& config);

}  // namespace ccc
