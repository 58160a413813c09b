#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "stitch/harness.hpp"
#include "stitch/report.hpp"
#include "scripted_world.hpp"
#include "trace_checks.hpp"

using namespace stitch;

namespace {

Event make_event(EventType type, int suture, PipelineState state = PipelineState::Insertion) {
  Event e;
  e.type = type;
  e.suture = suture;
  e.state = state;
  return e;
}

// Trial completing `done` sutures out of `target`, then failing with `kind` unless closed.
TrialLog fixture_trial(int id, int done, int target, ErrorKind kind = ErrorKind::H, double duration = 100.0) {
  TrialLog t;
  t.id = id;
  t.seed = static_cast<std::uint64_t>(id);
  t.target_sutures = target;
  t.sutures_completed = done;
  t.duration = duration;
  t.status = done == target ? TrialStatus::wound_closed : TrialStatus::failed;
  for (int i = 1; i <= done; ++i) {
    t.events.push_back(make_event(EventType::attempt_start, i));
    t.events.push_back(make_event(EventType::suture_done, i, PipelineState::Done));
  }
  if (done < target) {
    t.events.push_back(make_event(EventType::attempt_start, done + 1));
    Event err = make_event(EventType::error, done + 1, PipelineState::Handover);
    err.error = kind;
    t.events.push_back(err);
    t.failure = kind;
  }
  return t;
}

ExperimentConfig quiet_experiment(Preset preset, int trials) {
  ExperimentConfig c;
  c.preset = preset;
  c.n_trials = trials;
  c.sim = stitch_test::quiet_config();
  return c;
}

}  // namespace

TEST(Metrics, MeanSuturesToFailure) {
  const std::vector<TrialLog> logs{fixture_trial(0, 1, 6), fixture_trial(1, 2, 6), fixture_trial(2, 3, 6)};
  const auto m = compute_metrics(logs);
  EXPECT_DOUBLE_EQ(m.mean_sutures_to_failure, 2.0);
  EXPECT_EQ(format_mean(m.mean_sutures_to_failure), "2.00");
  EXPECT_EQ(m.histogram, (std::vector<int>{0, 1, 1, 1, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(m.three_throw_success_rate, 1.0 / 3.0);
  EXPECT_EQ(m.full_wound_success_rate, 0.0);
  EXPECT_EQ(m.errors(ErrorKind::H), 3);
  EXPECT_FALSE(m.mean_sutures_to_intervention);
}

TEST(Metrics, SingleSuturePercentage) {
  // 9 successes over 12 attempts: three trials of 3 successes plus one failed attempt each.
  std::vector<TrialLog> logs;
  for (int k = 0; k < 3; ++k) logs.push_back(fixture_trial(k, 3, 6));
  const auto m = compute_metrics(logs);
  EXPECT_EQ(m.attempted_throws, 12);
  EXPECT_EQ(m.successful_throws, 9);
  EXPECT_EQ(format_percent(m.single_suture_success_rate), "75.0%");
}

TEST(Metrics, FifteenTrialsWithFortyFourSutures) {
  const std::vector<int> done{6, 5, 4, 3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 1};
  ASSERT_EQ(std::accumulate(done.begin(), done.end(), 0), 44);
  std::vector<TrialLog> logs;
  for (std::size_t k = 0; k < done.size(); ++k) logs.push_back(fixture_trial(static_cast<int>(k), done[k], 6));
  const auto m = compute_metrics(logs);
  EXPECT_EQ(format_mean(m.mean_sutures_to_failure), "2.93");
  EXPECT_EQ(m.histogram[6], 1);
  EXPECT_EQ(format_percent(m.full_wound_success_rate), "6.7%");
}

TEST(Metrics, MeanTimeUsesSuccessfulThrows) {
  const std::vector<TrialLog> logs{fixture_trial(0, 2, 6, ErrorKind::I, 300.0), fixture_trial(1, 1, 6, ErrorKind::E, 150.0)};
  const auto m = compute_metrics(logs);
  ASSERT_TRUE(m.mean_time_per_suture);
  EXPECT_DOUBLE_EQ(*m.mean_time_per_suture, 150.0);
  EXPECT_EQ(m.errors(ErrorKind::I), 1);
  EXPECT_EQ(m.errors(ErrorKind::E), 1);

  const std::vector<TrialLog> none{fixture_trial(0, 0, 6)};
  EXPECT_FALSE(compute_metrics(none).mean_time_per_suture);
}

TEST(Metrics, InterventionGaps) {
  TrialLog t = fixture_trial(0, 0, 6);
  t.preset = Preset::stitch_human;
  t.events.clear();
  // success, intervention, success, success, intervention, success
  auto success = [&](int i) {
    t.events.push_back(make_event(EventType::attempt_start, i));
    t.events.push_back(make_event(EventType::suture_done, i, PipelineState::Done));
  };
  auto intervene = [&](int i) {
    Event e = make_event(EventType::error, i, PipelineState::Handover);
    e.error = ErrorKind::H;
    t.events.push_back(make_event(EventType::attempt_start, i));
    t.events.push_back(e);
    Event h = make_event(EventType::intervention, i, PipelineState::Failed);
    h.intervention = true;
    t.events.push_back(h);
  };
  success(1);
  intervene(2);
  success(2);
  success(3);
  intervene(4);
  success(4);
  t.sutures_completed = 4;
  const std::vector<TrialLog> logs{t};
  const auto m = compute_metrics(logs);
  EXPECT_EQ(m.interventions, 2);
  ASSERT_TRUE(m.mean_sutures_to_intervention);
  EXPECT_DOUBLE_EQ(*m.mean_sutures_to_intervention, 1.5);
  EXPECT_EQ(m.errors(ErrorKind::H), 2);
  EXPECT_EQ(m.attempted_throws, 6);
}

TEST(Metrics, EmptyInput) { EXPECT_THROW(compute_metrics(std::vector<TrialLog>{}), std::invalid_argument); }

TEST(Report, Formatting) {
  EXPECT_EQ(format_mean(2.9333), "2.93");
  EXPECT_EQ(format_percent(0.6939), "69.4%");
  EXPECT_EQ(format_seconds(159.27), "159.3");
  EXPECT_EQ(format_percent(0.0), "0.0%");
}

TEST(Report, CsvHasOneRowPerPreset) {
  const std::vector<TrialLog> logs{fixture_trial(0, 2, 6)};
  const auto m = compute_metrics(logs);
  const std::string csv = report_render({{"Sensing Only", m}, {"STITCH", m}}, ReportFormat::csv);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("method,mean_sutures_to_failure,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("STITCH,2.00,", 0), 0u) << lines[2];
}

TEST(Report, TableColumnOrder) {
  const std::vector<TrialLog> logs{fixture_trial(0, 2, 6)};
  const std::string table = report_render("STITCH", compute_metrics(logs), ReportFormat::table);
  const auto mean = table.find("Mean Sutures to Failure");
  const auto single = table.find("Single-Suture");
  const auto time = table.find("Mean Time per Suture");
  const auto interv = table.find("Mean Sutures to Intervention");
  ASSERT_NE(mean, std::string::npos);
  EXPECT_LT(mean, single);
  EXPECT_LT(single, time);
  EXPECT_LT(time, interv);
  EXPECT_NE(table.find("66.7%"), std::string::npos);
}

TEST(Experiment, NominalTrialsCloseTheWound) {
  const auto config = quiet_experiment(Preset::stitch, 5);
  const auto logs = run_experiment(config);
  ASSERT_EQ(logs.size(), 5u);
  for (const auto& log : logs) {
    EXPECT_EQ(log.status, TrialStatus::wound_closed);
    EXPECT_EQ(log.sutures_completed, 6);
    const auto report = trace_check::all(log.events, stages_for(config.preset), config.controller);
    EXPECT_TRUE(report.ok()) << report.text();
  }
  const auto m = compute_metrics(logs);
  EXPECT_EQ(m.full_wound_success_rate, 1.0);
}

TEST(Experiment, SeedsAndJobsDoNotChangeResults) {
  ExperimentConfig config;
  config.n_trials = 6;
  config.base_seed = 42;
  const auto serial = run_experiment(config);
  config.jobs = 3;
  const auto parallel = run_experiment(config);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(run_trial(config, 4), serial[4]);
  EXPECT_EQ(serial[4].seed, 46u);
}

TEST(Experiment, HumanModeUsesAtMostTwoInterventions) {
  ExperimentConfig config;
  config.preset = Preset::stitch_human;
  config.n_trials = 20;
  const auto logs = run_experiment(config);
  int total = 0;
  for (const auto& log : logs) {
    int n = 0;
    for (const auto& e : log.events) n += e.type == EventType::intervention ? 1 : 0;
    EXPECT_LE(n, 2);
    total += n;
    const auto report = trace_check::all(log.events, stages_for(config.preset), config.controller);
    EXPECT_TRUE(report.ok()) << report.text();
  }
  EXPECT_GT(total, 0);
}

TEST(Experiment, PresetsWithoutHumansNeverIntervene) {
  for (Preset p : {Preset::sensing_only, Preset::thread_handling, Preset::stitch}) {
    ExperimentConfig config;
    config.preset = p;
    config.n_trials = 10;
    for (const auto& log : run_experiment(config)) {
      for (const auto& e : log.events) EXPECT_NE(e.type, EventType::intervention);
      const auto report = trace_check::all(log.events, stages_for(p), config.controller);
      EXPECT_TRUE(report.ok()) << report.text();
    }
  }
}
