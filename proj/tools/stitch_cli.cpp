// stitch: synthetic needle clouds, pose estimation, suturing trials and reports.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stitch/config.hpp"
#include "stitch/harness.hpp"
#include "stitch/log_io.hpp"
#include "stitch/perception.hpp"
#include "stitch/pointcloud_io.hpp"
#include "stitch/report.hpp"
#include "stitch/rng.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string vec_text(const stitch::Vec3& v) {
  std::ostringstream out;
  out.precision(17);
  out << v.x() << ' ' << v.y() << ' ' << v.z();
  return out.str();
}

stitch::NeedlePose random_pose(std::uint64_t seed, const stitch::NeedleSpec& spec) {
  stitch::Rng rng = stitch::make_rng(seed, 0x5e7);
  std::uniform_real_distribution<double> box(-0.01, 0.01);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const stitch::Point3 center(box(rng), box(rng), box(rng));
  stitch::Vec3 n(gauss(rng), gauss(rng), gauss(rng));
  stitch::Vec3 s(gauss(rng), gauss(rng), gauss(rng));
  const auto normal = stitch::UnitVector3::normalized(n);
  s -= s.dot(normal.vec()) * normal.vec();
  return stitch::make_needle_pose(center, normal, s, spec);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

stitch::ExperimentConfig resolve_config(const std::string& path, const std::string& preset,
                                        const std::optional<int>& trials, const std::optional<std::uint64_t>& seed,
                                        const std::optional<int>& jobs) {
  stitch::ExperimentConfig config = path.empty() ? stitch::ExperimentConfig{} : stitch::load_config(path);
  if (!preset.empty()) config.preset = stitch::parse_preset(preset);
  if (trials) config.n_trials = *trials;
  if (seed) config.base_seed = *seed;
  if (jobs) config.jobs = *jobs;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autonomous suturing pipeline: perception, simulation and experiment reports"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic segmented needle point cloud");
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  int synth_points = 200;
  stitch::NoiseModel synth_noise{0.0005, 0.2, stitch::Vec3(0.06, 0.06, 0.06), 0.0, stitch::deg_to_rad(45.0), 0.5};
  double synth_occlusion_deg = 45.0;
  stitch::NeedleSpec synth_spec;
  synth->add_option("-o,--out", synth_out, "Output file (stdout when omitted)");
  synth->add_option("--seed", synth_seed, "Seed for the needle pose and the noise");
  synth->add_option("--points", synth_points, "Total points, outliers included")->check(CLI::PositiveNumber);
  synth->add_option("--sigma", synth_noise.gaussian_sigma, "Gaussian noise per axis (m)")->check(CLI::NonNegativeNumber);
  synth->add_option("--outliers", synth_noise.outlier_fraction, "Outlier fraction")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--dropout", synth_noise.dropout_fraction, "Dropout fraction")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--occlusion-deg", synth_occlusion_deg, "Hidden arc at mid-needle (degrees)")->check(CLI::NonNegativeNumber);
  synth->add_option("--radius", synth_spec.radius, "Needle radius (m)")->check(CLI::PositiveNumber);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate the needle pose from a point cloud file");
  std::string cloud_path;
  std::uint64_t est_seed = 0;
  stitch::NeedleSpec est_spec;
  int est_iterations = 500;
  estimate->add_option("cloud", cloud_path, "Point cloud file (x,y,z per line)")->required();
  estimate->add_option("--seed", est_seed, "RANSAC seed");
  estimate->add_option("--radius", est_spec.radius, "Needle radius (m)")->check(CLI::PositiveNumber);
  estimate->add_option("--iterations", est_iterations, "RANSAC iterations per stage")->check(CLI::PositiveNumber);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run suturing trials and write their logs");
  std::string sim_config;
  std::string sim_preset;
  std::optional<int> sim_trials;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_jobs;
  std::string sim_out;
  std::string sim_format = "table";
  simulate->add_option("-c,--config", sim_config, "Configuration file (JSON, comments allowed)");
  simulate->add_option("--preset", sim_preset, "sensing_only, thread_handling, stitch or stitch_human");
  simulate->add_option("--trials", sim_trials, "Number of trials");
  simulate->add_option("--seed", sim_seed, "Base seed; trial k uses seed + k");
  simulate->add_option("--jobs", sim_jobs, "Worker threads");
  simulate->add_option("-o,--out", sim_out, "Log file (line-delimited JSON)");
  simulate->add_option("--format", sim_format, "Summary format: table or csv");

  // report
  auto* report = app.add_subcommand("report", "Summarize trial logs");
  std::vector<std::string> log_paths;
  std::string report_format = "table";
  report->add_option("-l,--logs", log_paths, "Log file(s) written by simulate")->required();
  report->add_option("--format", report_format, "table, csv or histogram");

  // config
  auto* dump = app.add_subcommand("config", "Print the complete configuration (defaults merged with a file)");
  std::string dump_config;
  dump->add_option("-c,--config", dump_config, "Configuration file to merge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*synth) {
      synth_spec.validate();
      synth_noise.occlusion_arc = stitch::deg_to_rad(synth_occlusion_deg);
      synth_noise.validate();
      const stitch::NeedlePose truth = random_pose(synth_seed, synth_spec);
      const auto cloud = stitch::synth_needle_cloud(truth, synth_spec, synth_noise, synth_points, synth_seed);
      const std::string comment = "truth center " + vec_text(truth.circle.center) + " normal " +
                                  vec_text(truth.circle.normal.vec()) + " tip " + vec_text(truth.tip) + " swage " +
                                  vec_text(truth.swage);
      std::ostringstream text;
      stitch::write_point_cloud(text, cloud, comment);
      write_text(synth_out, text.str());
      return 0;
    }

    if (*estimate) {
      est_spec.validate();
      const auto cloud = stitch::read_point_cloud_file(cloud_path);
      auto params = stitch::EstimatorParams::with_seed(est_seed);
      params.plane.iterations = est_iterations;
      params.circle.iterations = est_iterations;
      const auto result = stitch::estimate_needle_pose(cloud, est_spec, params);
      std::cout << stitch::format_pose_record(result) << '\n';
      return 0;
    }

    if (*simulate) {
      stitch::ExperimentConfig config;
      stitch::ReportFormat format;
      try {
        config = resolve_config(sim_config, sim_preset, sim_trials, sim_seed, sim_jobs);
        format = stitch::parse_report_format(sim_format);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto logs = stitch::run_experiment(config);
      if (!sim_out.empty()) stitch::write_logs_file(sim_out, logs);
      const auto metrics = stitch::compute_metrics(logs);
      std::cout << stitch::report_render(stitch::display_name(config.preset), metrics, format);
      return 0;
    }

    if (*report) {
      if (report_format != "table" && report_format != "csv" && report_format != "histogram") {
        throw UsageError("unknown report format '" + report_format + "' (expected table, csv or histogram)");
      }
      // One row per preset, in preset order.
      std::map<stitch::Preset, std::vector<stitch::TrialLog>> by_preset;
      for (const auto& path : log_paths) {
        for (auto& log : stitch::read_logs_file(path)) by_preset[log.preset].push_back(std::move(log));
      }
      if (by_preset.empty()) throw std::runtime_error("the log files contain no trials");
      std::vector<std::pair<std::string, stitch::MetricsReport>> rows;
      for (const auto& [preset, logs] : by_preset) rows.emplace_back(stitch::display_name(preset), stitch::compute_metrics(logs));
      if (report_format == "histogram") {
        std::cout << stitch::render_histogram_csv(rows);
      } else {
        std::cout << stitch::report_render(rows, stitch::parse_report_format(report_format));
      }
      return 0;
    }

    if (*dump) {
      const auto config = dump_config.empty() ? stitch::ExperimentConfig{} : stitch::load_config(dump_config);
      std::cout << stitch::config_to_json(config);
      return 0;
    }
  } catch (const stitch::ConfigError& e) {
    std::cerr << "stitch: configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "stitch: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "stitch: invalid argument: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "stitch: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
