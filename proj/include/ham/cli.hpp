#pragma once

// Configuration handling and the `hamlab` command line entry point.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ham/levy_noise.hpp"

namespace ham {

inline constexpr const char* kVersion = "0.1.0";

/// Effective key=value settings of one run: experiment defaults, then the
/// config file, then command line flags.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  explicit ExperimentConfig(std::string experiment);

  const std::string& experiment() const { return experiment_; }

  /// Throws ConfigError for keys no experiment understands.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  /// Merges `key = value` lines; '#' starts a comment.
  void load_file(const std::string& path);

  /// FNV-1a 64 of the sorted settings, excluding `threads` and `out`, as
  /// 16 hex digits. Thread count and output location never change results.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::vector<std::string>& known_keys();
  static const std::vector<std::string>& experiments();

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

/// Parses "two_point:a=1,lambda=5", "uniform:a=2,lambda=3" or
/// "atoms:2@0.5,-0.5@2" (size@mass pairs).
LevyModel parse_model(const std::string& spec, double alpha);

/// Runs one subcommand. Returns the process exit code; failures print a
/// one-line JSON error record to stderr.
int run(int argc, char** argv);

}  // namespace ham
