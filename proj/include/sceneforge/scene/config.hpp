#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace sceneforge {

struct RunConfig {
  double lambda_mask = 0.5;
  double lambda_depth = 10.0;
  double lambda_normal = 10.0;
  double lambda_pene = 5.0;
  double lambda_touch = 1.0;
  double lambda_stable = 1.0;

  int samples_per_instance = 3;
  std::vector<std::string> sampler_kinds{"extrude", "mirror", "hull", "closure", "perturb"};

  double stable_translation = 0.02;  // m
  double stable_rotation = 0.0873;   // rad
  double sim_duration = 2.0;         // s
  double sim_dt = 2e-3;              // s

  int grid_resolution = 64;
  int views = 24;
  int virtual_views = 8;
  double fscore_tau = 0.05;
  int eval_samples = 10000;
  double density = 300.0;  // kg/m^3

  std::uint64_t seed = 0;

  /// Throws precondition error naming the first offending field.
  void validate() const;
};

/// Value of a flat `key = value` TOML document.
using TomlValue = std::variant<bool, std::int64_t, double, std::string,
                               std::vector<std::variant<bool, std::int64_t, double, std::string>>>;

/// Parses the TOML subset used for configs: comments, `[table]` headers
/// (keys stay flat), and values that are booleans, integers, floats, basic
/// strings or one-line arrays of those.
std::map<std::string, TomlValue> parse_toml_subset(const std::string& text,
                                                  const std::string& name);

/// Defaults overridden by the given document; unknown keys are rejected.
RunConfig config_from_toml(const std::string& text, const std::string& name);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace sceneforge
