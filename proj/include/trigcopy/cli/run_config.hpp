#pragma once

#include "trigcopy/data/parsers.hpp"
#include "trigcopy/model/config.hpp"
#include "trigcopy/sweep/sweep.hpp"
#include "trigcopy/training/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace trigcopy {

/// Bad flag, key, value or missing input file; exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognised key. Model keys default to empty, meaning "take the
/// value from the preset".
const std::vector<ConfigKey>& config_keys();

using EnvLookup = std::function<const char*(const char*)>;

/// Flat key-value configuration. Precedence: defaults < environment
/// (TRIGCOPY_DATA_DIR, TRIGCOPY_CKPT_DIR) < config file < flags.
class RunConfig {
 public:
  explicit RunConfig(const EnvLookup& env = [](const char* name) { return std::getenv(name); });

  /// Throws UsageError for unknown keys.
  void set(const std::string& key, const std::string& value, const std::string& source);
  /// `key = value` lines, `#` comments, blank lines ignored.
  void load(std::istream& in, const std::string& origin);
  void load_file(const std::filesystem::path& path);

  [[nodiscard]] const std::string& get(const std::string& key) const;
  [[nodiscard]] const std::string& source(const std::string& key) const;
  [[nodiscard]] bool is_set(const std::string& key) const { return !get(key).empty(); }
  [[nodiscard]] long long get_int(const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& key) const;
  [[nodiscard]] bool get_bool(const std::string& key) const;
  /// Dataset paths resolve against data_dir, artifact paths against ckpt_dir.
  [[nodiscard]] std::filesystem::path get_path(const std::string& key) const;

  [[nodiscard]] DatasetFormat format() const;
  [[nodiscard]] ModelConfig model_config() const;
  [[nodiscard]] TrainConfig train_config() const;
  [[nodiscard]] SweepConfig sweep_config() const;
  [[nodiscard]] bool use_float() const;

  /// Sorted `key = value` lines; loading them back reproduces the config.
  [[nodiscard]] std::string dump() const;
  [[nodiscard]] nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> sources_;
};

std::vector<double> parse_number_list(const std::string& text, const std::string& key);

}  // namespace trigcopy
