#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "stitch/config.hpp"
#include "stitch/controller.hpp"
#include "stitch/harness.hpp"
#include "stitch/log_io.hpp"
#include "stitch/perception.hpp"
#include "stitch/report.hpp"

namespace py = pybind11;
using namespace stitch;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Points& points) {
  if (points.ndim() != 2 || points.shape(1) != 3) throw std::invalid_argument("points must have shape (n, 3)");
  const auto a = points.unchecked<2>();
  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t k = 0; k < a.shape(0); ++k) cloud.points.emplace_back(a(k, 0), a(k, 1), a(k, 2));
  return cloud;
}

Points to_array(const PointCloud& cloud) {
  Points out({static_cast<py::ssize_t>(cloud.size()), py::ssize_t{3}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    for (int c = 0; c < 3; ++c) a(static_cast<py::ssize_t>(k), c) = cloud.points[k][c];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_stitch, m) {
  m.doc() = "Needle pose estimation, suturing simulation and experiment metrics";

  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CinchError>(m, "CinchError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<NeedleSpec>(m, "NeedleSpec")
      .def(py::init<>())
      .def(py::init([](double radius, double arc_span) {
             NeedleSpec s{radius, arc_span};
             s.validate();
             return s;
           }),
           py::arg("radius"), py::arg("arc_span") = kPi)
      .def_readwrite("radius", &NeedleSpec::radius)
      .def_readwrite("arc_span", &NeedleSpec::arc_span);

  py::class_<NeedlePose>(m, "NeedlePose")
      .def_property_readonly("center", [](const NeedlePose& p) { return p.circle.center; })
      .def_property_readonly("normal", [](const NeedlePose& p) { return p.circle.normal.vec(); })
      .def_property_readonly("radius", [](const NeedlePose& p) { return p.circle.radius; })
      .def_readonly("tip", &NeedlePose::tip)
      .def_readonly("swage", &NeedlePose::swage);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("gaussian_sigma", &NoiseModel::gaussian_sigma)
      .def_readwrite("outlier_fraction", &NoiseModel::outlier_fraction)
      .def_readwrite("outlier_box", &NoiseModel::outlier_box)
      .def_readwrite("dropout_fraction", &NoiseModel::dropout_fraction)
      .def_readwrite("occlusion_arc", &NoiseModel::occlusion_arc)
      .def_readwrite("occlusion_center", &NoiseModel::occlusion_center);

  py::class_<EstimateDiagnostics>(m, "EstimateDiagnostics")
      .def_readonly("cloud_points", &EstimateDiagnostics::cloud_points)
      .def_readonly("plane_inliers", &EstimateDiagnostics::plane_inliers)
      .def_readonly("circle_inliers", &EstimateDiagnostics::circle_inliers)
      .def_readonly("plane_rms", &EstimateDiagnostics::plane_rms)
      .def_readonly("circle_rms", &EstimateDiagnostics::circle_rms);

  py::class_<PoseEstimate>(m, "PoseEstimate")
      .def_readonly("pose", &PoseEstimate::pose)
      .def_readonly("diagnostics", &PoseEstimate::diagnostics);

  py::class_<PoseAgreement>(m, "PoseAgreement")
      .def_readonly("center_dist", &PoseAgreement::center_dist)
      .def_readonly("normal_angle", &PoseAgreement::normal_angle)
      .def_readonly("endpoint_dist", &PoseAgreement::endpoint_dist);

  m.def(
      "make_needle_pose",
      [](const Vec3& center, const Vec3& normal, const Vec3& swage_direction, const NeedleSpec& spec) {
        return make_needle_pose(center, UnitVector3::normalized(normal), swage_direction, spec);
      },
      py::arg("center"), py::arg("normal"), py::arg("swage_direction"), py::arg("spec") = NeedleSpec{});

  m.def(
      "synth_needle_cloud",
      [](const NeedlePose& pose, const NeedleSpec& spec, const NoiseModel& noise, int n_points, std::uint64_t seed) {
        noise.validate();
        return to_array(synth_needle_cloud(pose, spec, noise, n_points, seed));
      },
      py::arg("pose"), py::arg("spec") = NeedleSpec{}, py::arg("noise") = NoiseModel{}, py::arg("n_points") = 200,
      py::arg("seed") = 0, "Synthetic segmented needle cloud as an (n, 3) array.");

  m.def(
      "estimate_needle_pose",
      [](const Points& points, const NeedleSpec& spec, std::uint64_t seed) {
        const PointCloud cloud = to_cloud(points);
        py::gil_scoped_release release;
        return estimate_needle_pose(cloud, spec, EstimatorParams::with_seed(seed));
      },
      py::arg("points"), py::arg("spec") = NeedleSpec{}, py::arg("seed") = 0);

  m.def("pose_agreement", &pose_agreement, py::arg("a"), py::arg("b"));
  m.def("cinch_length", &cinch_length, py::arg("i"), py::arg("l_des"), py::arg("l_each"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_property(
          "preset", [](const ExperimentConfig& c) { return std::string(to_string(c.preset)); },
          [](ExperimentConfig& c, const std::string& p) { c.preset = parse_preset(p); })
      .def_readwrite("n_trials", &ExperimentConfig::n_trials)
      .def_readwrite("base_seed", &ExperimentConfig::base_seed)
      .def_readwrite("jobs", &ExperimentConfig::jobs)
      .def("to_json", [](const ExperimentConfig& c) { return config_to_json(c); });

  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<Event>(m, "Event")
      .def_readonly("time", &Event::time)
      .def_readonly("suture", &Event::suture)
      .def_property_readonly("type", [](const Event& e) { return std::string(to_string(e.type)); })
      .def_property_readonly("state", [](const Event& e) { return std::string(to_string(e.state)); })
      .def_property_readonly("to",
                             [](const Event& e) { return e.to ? py::object(py::str(to_string(*e.to))) : py::none(); })
      .def_readonly("retries", &Event::retries)
      .def_property_readonly(
          "error", [](const Event& e) { return e.error ? py::object(py::str(to_string(*e.error))) : py::none(); })
      .def_readonly("thread_length", &Event::thread_length)
      .def_readonly("jitter", &Event::jitter)
      .def_readonly("progress", &Event::progress)
      .def_readonly("detail", &Event::detail);

  py::class_<TrialLog>(m, "TrialLog")
      .def_readonly("id", &TrialLog::id)
      .def_readonly("seed", &TrialLog::seed)
      .def_property_readonly("preset", [](const TrialLog& t) { return std::string(to_string(t.preset)); })
      .def_property_readonly("status", [](const TrialLog& t) { return std::string(to_string(t.status)); })
      .def_property_readonly(
          "failure", [](const TrialLog& t) { return t.failure ? py::object(py::str(to_string(*t.failure))) : py::none(); })
      .def_readonly("sutures_completed", &TrialLog::sutures_completed)
      .def_readonly("target_sutures", &TrialLog::target_sutures)
      .def_readonly("duration", &TrialLog::duration)
      .def_readonly("events", &TrialLog::events)
      .def("__eq__", [](const TrialLog& a, const TrialLog& b) { return a == b; });

  m.def(
      "run_experiment",
      [](const ExperimentConfig& c) {
        c.validate();
        py::gil_scoped_release release;
        return run_experiment(c);
      },
      py::arg("config"));
  m.def("run_trial", &run_trial, py::arg("config"), py::arg("k"));

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("n_trials", &MetricsReport::n_trials)
      .def_readonly("mean_sutures_to_failure", &MetricsReport::mean_sutures_to_failure)
      .def_readonly("single_suture_success_rate", &MetricsReport::single_suture_success_rate)
      .def_readonly("three_throw_success_rate", &MetricsReport::three_throw_success_rate)
      .def_readonly("full_wound_success_rate", &MetricsReport::full_wound_success_rate)
      .def_readonly("mean_time_per_suture", &MetricsReport::mean_time_per_suture)
      .def_readonly("mean_sutures_to_intervention", &MetricsReport::mean_sutures_to_intervention)
      .def_readonly("histogram", &MetricsReport::histogram)
      .def_readonly("attempted_throws", &MetricsReport::attempted_throws)
      .def_readonly("successful_throws", &MetricsReport::successful_throws)
      .def_readonly("interventions", &MetricsReport::interventions)
      .def_property_readonly("error_counts", [](const MetricsReport& r) {
        py::dict d;
        for (ErrorKind k : {ErrorKind::I, ErrorKind::E, ErrorKind::H, ErrorKind::T}) d[to_string(k)] = r.errors(k);
        return d;
      });

  m.def(
      "compute_metrics", [](const std::vector<TrialLog>& logs) { return compute_metrics(logs); }, py::arg("logs"));
  m.def(
      "report",
      [](const std::vector<std::pair<std::string, MetricsReport>>& rows, const std::string& format) {
        return report_render(rows, parse_report_format(format));
      },
      py::arg("rows"), py::arg("format") = "table");

  m.def(
      "write_logs", [](const std::string& path, const std::vector<TrialLog>& logs) { write_logs_file(path, logs); },
      py::arg("path"), py::arg("logs"));
  m.def("read_logs", &read_logs_file, py::arg("path"));
}
