#include "stitch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "stitch/controller.hpp"
#include "stitch/simworld.hpp"

namespace stitch {

const char* to_string(TrialStatus s) { return s == TrialStatus::wound_closed ? "wound_closed" : "failed"; }

TrialStatus parse_trial_status(const std::string& s) {
  if (s == "wound_closed") return TrialStatus::wound_closed;
  if (s == "failed") return TrialStatus::failed;
  throw std::invalid_argument("unknown trial status '" + s + "'");
}

TrialLog run_trial(const ExperimentConfig& config, int k) {
  const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(k);
  SimWorld world(config.effective_sim(), seed);
  Controller controller(config.controller, stages_for(config.preset), seed);

  TrialLog log;
  log.id = k;
  log.seed = seed;
  log.preset = config.preset;
  log.target_sutures = world.wound().n_target_sutures;
  log.status = TrialStatus::wound_closed;
  for (int i = 1; i <= log.target_sutures; ++i) {
    StepOutcome out = controller.run_suture(world, i);
    log.events.insert(log.events.end(), std::make_move_iterator(out.events.begin()),
                      std::make_move_iterator(out.events.end()));
    if (out.state_after != PipelineState::Done) {
      log.status = TrialStatus::failed;
      log.failure = out.error;
      break;
    }
    ++log.sutures_completed;
  }
  log.duration = world.clock();
  return log;
}

std::vector<TrialLog> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int n = config.n_trials;
  std::vector<TrialLog> logs(static_cast<std::size_t>(n));
  const int workers = std::min(config.jobs, n);
  if (workers <= 1) {
    for (int k = 0; k < n; ++k) logs[static_cast<std::size_t>(k)] = run_trial(config, k);
    return logs;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          logs[static_cast<std::size_t>(k)] = run_trial(config, k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return logs;
}

MetricsReport compute_metrics(std::span<const TrialLog> logs) {
  if (logs.empty()) throw std::invalid_argument("no trial logs to summarize");
  MetricsReport m;
  m.n_trials = static_cast<int>(logs.size());

  int max_target = 0;
  for (const auto& log : logs) max_target = std::max({max_target, log.target_sutures, log.sutures_completed});
  m.histogram.assign(static_cast<std::size_t>(max_target) + 1, 0);

  bool human = false;
  double total_time = 0.0;
  int completed_sum = 0;
  int three = 0;
  int closed = 0;
  int gaps_sum = 0;
  for (const auto& log : logs) {
    human = human || log.preset == Preset::stitch_human;
    completed_sum += log.sutures_completed;
    if (log.sutures_completed >= 3) ++three;
    if (log.status == TrialStatus::wound_closed) ++closed;
    ++m.histogram[static_cast<std::size_t>(log.sutures_completed)];
    total_time += log.duration;

    int since_intervention = 0;
    for (const auto& e : log.events) {
      switch (e.type) {
        case EventType::attempt_start: ++m.attempted_throws; break;
        case EventType::suture_done:
          ++m.successful_throws;
          ++since_intervention;
          break;
        case EventType::error:
          if (e.error) ++m.error_counts[static_cast<int>(*e.error)];
          break;
        case EventType::intervention:
          ++m.interventions;
          gaps_sum += since_intervention;
          since_intervention = 0;
          break;
        default: break;
      }
    }
  }

  const double n = static_cast<double>(m.n_trials);
  m.mean_sutures_to_failure = completed_sum / n;
  m.single_suture_success_rate =
      m.attempted_throws > 0 ? static_cast<double>(m.successful_throws) / m.attempted_throws : 0.0;
  m.three_throw_success_rate = three / n;
  m.full_wound_success_rate = closed / n;
  if (m.successful_throws > 0) m.mean_time_per_suture = total_time / m.successful_throws;
  if (human && m.interventions > 0) m.mean_sutures_to_intervention = static_cast<double>(gaps_sum) / m.interventions;
  return m;
}

}  // namespace stitch
