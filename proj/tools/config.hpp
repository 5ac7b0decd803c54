#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace holomera::cli {

inline const std::vector<std::string> kKinds{"scaling-dims", "flow",        "crossover", "holo-compare",
                                             "entropy",      "mps-export", "optimize"};

/// Parsed experiment configuration. Optional fields fall back to per-kind defaults.
struct ExperimentConfig {
  std::string kind;
  int chi = 2;
  int b = 3;
  std::optional<int> w_star;
  std::string cap = "product";
  std::optional<double> z_star;
  std::optional<double> eta;
  std::optional<int> alpha;
  std::optional<int> beta;
  std::vector<double> m2{0.0, 1.0, 2.0};
  std::uint64_t seed = 0;
  std::vector<double> separations;
  int levels = 5;
  std::string source = "random";
  std::optional<std::string> network;
  int sweeps = 200;
  std::vector<long> ells;
  int offsets = 9;
  int checkpoint_every = 0;
  int count = 8;
  nlohmann::json outputs = nlohmann::json::object();

  /// Canonical form (sorted keys, effective seed) used for the artifact hash.
  nlohmann::json canonical;
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Artifact roles of a kind with their default file names; `outputs` may rename them.
const std::vector<std::pair<std::string, std::string>>& artifact_roles(const std::string& kind);

/// Schema and range checks; `config` is filled only when the report is clean.
ValidationReport parse_config(const std::string& text, const std::string& kind, ExperimentConfig& config,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

/// SHA-256 of the canonical configuration, hex encoded.
std::string config_hash(const ExperimentConfig& config);

}  // namespace holomera::cli
