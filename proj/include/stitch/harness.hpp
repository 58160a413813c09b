#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stitch/config.hpp"
#include "stitch/trace.hpp"

namespace stitch {

enum class TrialStatus { wound_closed, failed };

const char* to_string(TrialStatus s);
TrialStatus parse_trial_status(const std::string& s);

struct TrialLog {
  int id = 0;
  std::uint64_t seed = 0;
  Preset preset = Preset::stitch;
  TrialStatus status = TrialStatus::failed;
  std::optional<ErrorKind> failure;
  int sutures_completed = 0;
  int target_sutures = 0;
  /// Simulated seconds from the start of the trial to its end.
  double duration = 0.0;
  EventTrace events;

  bool operator==(const TrialLog&) const = default;
};

/// Trial `k` of `config`, seeded with base_seed + k.
TrialLog run_trial(const ExperimentConfig& config, int k);

/// All trials in id order; uses `config.jobs` worker threads.
std::vector<TrialLog> run_experiment(const ExperimentConfig& config);

struct MetricsReport {
  int n_trials = 0;
  double mean_sutures_to_failure = 0.0;
  /// Rates are fractions in [0, 1]; reports render them as percentages.
  double single_suture_success_rate = 0.0;
  double three_throw_success_rate = 0.0;
  double full_wound_success_rate = 0.0;
  /// Total simulated time over successful throws; absent with no successes.
  std::optional<double> mean_time_per_suture;
  std::array<int, 4> error_counts{};  // indexed by ErrorKind
  std::optional<double> mean_sutures_to_intervention;
  /// histogram[n] = trials that completed exactly n sutures.
  std::vector<int> histogram;
  int attempted_throws = 0;
  int successful_throws = 0;
  int interventions = 0;

  int errors(ErrorKind k) const { return error_counts[static_cast<int>(k)]; }
  bool operator==(const MetricsReport&) const = default;
};

/// Throws std::invalid_argument on empty input.
MetricsReport compute_metrics(std::span<const TrialLog> logs);

}  // namespace stitch
