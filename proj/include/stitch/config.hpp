#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "stitch/controller.hpp"
#include "stitch/simworld.hpp"

namespace stitch {

enum class Preset { sensing_only, thread_handling, stitch, stitch_human };

const char* to_string(Preset p);
/// Human-readable method name used in reports.
const char* display_name(Preset p);
Preset parse_preset(const std::string& s);

/// sensing_only drops sweep, cinch and pose correction; thread_handling drops
/// pose correction; stitch_human adds human interventions.
Stages stages_for(Preset p);

/// Bad configuration value; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  Preset preset = Preset::stitch;
  int n_trials = 15;
  std::uint64_t base_seed = 1;
  /// Worker threads for trials; results do not depend on it.
  int jobs = 1;
  SimConfig sim;
  ControllerParams controller;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  /// World configuration with the preset applied (no intervention budget outside human mode).
  SimConfig effective_sim() const;
};

/// Parses a JSON document (comments allowed). Missing keys keep their
/// defaults; unknown keys are rejected. Angles are given in degrees.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
/// Complete configuration as JSON; parse_config(to_json(c)) reproduces `c`
/// (angles exactly whenever some double in degrees converts back to them).
std::string config_to_json(const ExperimentConfig& config);

}  // namespace stitch
