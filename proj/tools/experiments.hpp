#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace holomera::cli {

struct Artifact {
  std::string name;
  std::string content;
};

/// Runs one experiment and returns its artifacts in emission order. Library exceptions propagate:
/// InvalidArgument for inputs the validator cannot see (network files, block budgets), NumericalError
/// for failed numerics.
std::vector<Artifact> run_experiment(const ExperimentConfig& config);

}  // namespace holomera::cli
