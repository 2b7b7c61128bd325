#pragma once

// Project configuration: one YAML document describing the network, the
// models, the solver and the simulation. See configs/README.md for the
// grammar.

#include <optional>
#include <stdexcept>
#include <string>

#include "hinftrack/simulation.hpp"
#include "hinftrack/synthesis.hpp"

namespace hinftrack::cli {

/// Load-time error; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProjectConfig {
  Adjacency adjacency;
  double h = 0.0;
  LeaderModel leader;
  FollowerModel follower;
  SensingModel sensing;
  Matrix C_perf;
  double gamma = 1.0;
  SolverOptions solver;
  SimConfig simulation;
  std::optional<Matrix> reference_gain;  // optional gain to verify alongside the synthesized one
};

/// Parses and checks every cross-dimension constraint. `base_dir` resolves
/// relative file references (disturbance tables).
ProjectConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ProjectConfig load_config(const std::string& path);

/// The augmented system for a parsed config. Throws ConfigError.
AugmentedSystem augmented(const ProjectConfig& cfg);

/// Reads a disturbance table: CSV lines "k,node,w_1,...,w_mω" (node ≥ 2),
/// '#' comments allowed. Every (k, node) pair in 0…horizon must be present.
std::vector<std::vector<Matrix>> load_disturbance_table(const std::string& path, std::size_t followers,
                                                        std::size_t mw);

/// Configuration text for the built-in worked example.
const std::string& demo_config_text();

}  // namespace hinftrack::cli
