#pragma once

// Run configuration: flat `key = value` files with `#` comments.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jpmcount/harness.hpp"
#include "jpmcount/rate_model.hpp"

namespace jpm::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Spacing { kLinear, kLog };

struct TimeGrid {
  double start = 0.1e-6;  ///< s
  double stop = 10e-6;    ///< s
  int points = 200;
  Spacing spacing = Spacing::kLinear;

  void validate() const;
  std::vector<double> values() const;
};

struct RunConfig {
  DeviceConfig device;
  TunnelingOverrides overrides;
  int n_fock = 6;
  TimeGrid grid;
  double margin = kDefaultNmaxMargin;
  double mleq_factor = 10.0;
  double gap_factor = 4.0;
  std::optional<double> temperature;
  int photon_number = 2;
  ProtocolPriors priors;
  std::string out_dir = ".";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  ValidityOptions validity_options() const;
};

/// Keys that must appear in every config file.
const std::vector<std::string>& required_keys();
/// Every numeric key, in documentation order (sweepable).
std::vector<std::string> numeric_keys();

/// Sets a numeric field by config key; throws ConfigError for unknown keys.
void set_numeric(RunConfig& cfg, std::string_view key, double value);
double get_numeric(const RunConfig& cfg, std::string_view key);

RunConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

}  // namespace jpm::cli
