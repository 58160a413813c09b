#include "stitch/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace stitch {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Reads values from a JSON tree into existing fields, rejecting unknown keys.
class Reader {
 public:
  explicit Reader(const json& root) : stack_{{&root, "", {}}} {}

  void section(const char* key, const std::function<void()>& body) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_object()) throw ConfigError(path(key), "expected an object");
    stack_.push_back({j, path(key), {}});
    body();
    finish();
    stack_.pop_back();
  }

  void number(const char* key, double& out) {
    if (const json* j = find(key)) out = as_number(*j, path(key));
  }

  void degrees(const char* key, double& radians) {
    if (const json* j = find(key)) radians = deg_to_rad(as_number(*j, path(key)));
  }

  void integer(const char* key, int& out) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_number_integer()) throw ConfigError(path(key), "expected an integer");
    const auto v = j->get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw ConfigError(path(key), "integer out of range");
    }
    out = static_cast<int>(v);
  }

  void seed(const char* key, std::uint64_t& out) {
    const json* j = find(key);
    if (!j) return;
    if (j->is_number_unsigned()) {
      out = j->get<std::uint64_t>();
    } else if (j->is_number_integer() && j->get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(j->get<std::int64_t>());
    } else {
      throw ConfigError(path(key), "expected a non-negative integer");
    }
  }

  void vec3(const char* key, Vec3& out) {
    if (const json* j = find(key)) out = as_vec3(*j, path(key));
  }

  void unit(const char* key, UnitVector3& out) {
    const json* j = find(key);
    if (!j) return;
    try {
      out = UnitVector3::normalized(as_vec3(*j, path(key)));
    } catch (const InvalidAxis&) {
      throw ConfigError(path(key), "expected a non-zero direction");
    }
  }

  void points(const char* key, std::vector<Point3>& out) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_array()) throw ConfigError(path(key), "expected an array of [x, y, z] points");
    out.clear();
    for (std::size_t k = 0; k < j->size(); ++k) out.push_back(as_vec3((*j)[k], path(key) + "[" + std::to_string(k) + "]"));
  }

  void text(const char* key, std::string& out) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_string()) throw ConfigError(path(key), "expected a string");
    out = j->get<std::string>();
  }

  void durations(const char* key, std::map<std::string, double>& out) {
    const json* j = find(key);
    if (!j) return;
    if (!j->is_object()) throw ConfigError(path(key), "expected an object of seconds per primitive");
    for (const auto& [name, value] : j->items()) out[name] = as_number(value, join(path(key), name));
  }

  bool has(const char* key) const { return stack_.back().j->contains(key); }

  std::string path(const char* key) const { return join(stack_.back().path, key); }

  void finish() {
    const auto& top = stack_.back();
    for (const auto& [key, value] : top.j->items()) {
      if (!top.seen.count(key)) throw ConfigError(join(top.path, key), "unknown key");
    }
  }

 private:
  struct Frame {
    const json* j;
    std::string path;
    std::set<std::string> seen;
  };

  const json* find(const char* key) {
    auto& top = stack_.back();
    top.seen.insert(key);
    const auto it = top.j->find(key);
    return it == top.j->end() ? nullptr : &*it;
  }

  static double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where, "expected a number");
    return j.get<double>();
  }

  static Vec3 as_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where, "expected [x, y, z]");
    return Vec3(as_number(j[0], where), as_number(j[1], where), as_number(j[2], where));
  }

  std::vector<Frame> stack_;
};

/// Degree value that converts back to exactly `radians`, when one is within a few ulps.
double exact_degrees(double radians) {
  const double guess = rad_to_deg(radians);
  double up = guess;
  double down = guess;
  for (int k = 0; k < 8; ++k) {
    if (deg_to_rad(up) == radians) return up;
    if (deg_to_rad(down) == radians) return down;
    up = std::nextafter(up, HUGE_VAL);
    down = std::nextafter(down, -HUGE_VAL);
  }
  return guess;
}

/// Mirror of Reader that serializes the same fields.
class Writer {
 public:
  Writer() { stack_.push_back(ordered_json::object()); }

  void section(const char* key, const std::function<void()>& body) {
    stack_.push_back(ordered_json::object());
    body();
    ordered_json done = std::move(stack_.back());
    stack_.pop_back();
    stack_.back()[key] = std::move(done);
  }
  void number(const char* key, double& v) { stack_.back()[key] = v; }
  void degrees(const char* key, double& radians) { stack_.back()[key] = exact_degrees(radians); }
  void integer(const char* key, int& v) { stack_.back()[key] = v; }
  void seed(const char* key, std::uint64_t& v) { stack_.back()[key] = v; }
  void vec3(const char* key, Vec3& v) { stack_.back()[key] = {v.x(), v.y(), v.z()}; }
  void unit(const char* key, UnitVector3& v) { stack_.back()[key] = {v.x(), v.y(), v.z()}; }
  void points(const char* key, std::vector<Point3>& pts) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y(), p.z()});
    stack_.back()[key] = std::move(arr);
  }
  void text(const char* key, std::string& v) { stack_.back()[key] = v; }
  void durations(const char* key, std::map<std::string, double>& m) {
    ordered_json obj = ordered_json::object();
    for (const auto& [name, seconds] : m) obj[name] = seconds;
    stack_.back()[key] = std::move(obj);
  }
  bool has(const char*) const { return false; }
  std::string path(const char* key) const { return key; }

  std::string dump() const { return stack_.front().dump(2) + "\n"; }

 private:
  std::vector<ordered_json> stack_;
};

template <typename IO>
void visit_ransac(IO& io, RansacParams& r) {
  io.integer("iterations", r.iterations);
  io.number("inlier_threshold", r.inlier_threshold);
  io.integer("min_inliers", r.min_inliers);
}

template <typename IO>
void visit(IO& io, ExperimentConfig& c, std::string& preset) {
  io.section("experiment", [&] {
    io.text("preset", preset);
    io.integer("n_trials", c.n_trials);
    io.seed("base_seed", c.base_seed);
    io.integer("jobs", c.jobs);
  });
  io.section("needle", [&] {
    io.number("radius", c.sim.needle.radius);
    io.degrees("arc_span_deg", c.sim.needle.arc_span);
  });
  io.section("wound", [&] {
    if (io.has("standard")) {
      int n = 6;
      double spacing = 0.01;
      double bite = 0.016;
      io.section("standard", [&] {
        io.integer("n_sutures", n);
        io.number("spacing", spacing);
        io.number("bite", bite);
      });
      if (io.has("entry_points") || io.has("exit_points")) {
        throw ConfigError(io.path("standard"), "give either a standard wound or explicit points, not both");
      }
      if (n < 1) throw ConfigError(io.path("standard") + ".n_sutures", "must be >= 1");
      const UnitVector3 axis = c.sim.wound.wound_axis;
      c.sim.wound = WoundSpec::standard(n, spacing, bite);
      c.sim.wound.wound_axis = axis;
    }
    io.points("entry_points", c.sim.wound.entry_points);
    io.points("exit_points", c.sim.wound.exit_points);
    io.unit("wound_axis", c.sim.wound.wound_axis);
    c.sim.wound.n_target_sutures = static_cast<int>(c.sim.wound.entry_points.size());
  });
  io.section("thread", [&] { io.number("total_length", c.sim.thread_length); });
  io.section("failures", [&] {
    auto& f = c.sim.failures;
    io.number("grasp_miss_base", f.grasp_miss_base);
    io.number("grasp_miss_per_mm_pose_error", f.grasp_miss_per_mm_pose_error);
    io.number("entanglement_prob_unswept", f.entanglement_prob_unswept);
    io.number("entanglement_prob_swept", f.entanglement_prob_swept);
    io.number("insertion_slip_prob", f.insertion_slip_prob);
    io.number("perception_corruption_prob", f.perception_corruption_prob);
    io.integer("intervention_budget", f.intervention_budget);
  });
  io.section("timing", [&] {
    io.number("perception_period", c.sim.timing.perception_period);
    io.durations("durations", c.sim.timing.durations);
  });
  io.section("perception", [&] {
    auto& p = c.sim.perception;
    io.integer("n_points", p.n_points);
    io.section("noise", [&] {
      io.number("gaussian_sigma", p.noise.gaussian_sigma);
      io.number("outlier_fraction", p.noise.outlier_fraction);
      io.vec3("outlier_box", p.noise.outlier_box);
      io.number("dropout_fraction", p.noise.dropout_fraction);
    });
    io.vec3("view_corner", p.view_corner);
    io.number("view_radius", p.view_radius);
    io.number("off_corner_noise_scale", p.off_corner_noise_scale);
    io.number("corner_corruption_scale", p.corner_corruption_scale);
    io.number("corruption_min_deg", p.corruption_min_deg);
    io.number("corruption_max_deg", p.corruption_max_deg);
    io.number("corruption_min_shift", p.corruption_min_shift);
    io.number("corruption_max_shift", p.corruption_max_shift);
    io.degrees("jaw_occlusion_half_arc_deg", p.jaw_occlusion_half_arc);
    io.degrees("min_visible_arc_deg", p.min_visible_arc);
  });
  io.section("ransac", [&] {
    auto& e = c.sim.perception.estimator;
    io.section("plane", [&] { visit_ransac(io, e.plane); });
    io.section("circle", [&] { visit_ransac(io, e.circle); });
    io.number("refine_band_scale", e.refine_band_scale);
    io.integer("refine_rounds", e.refine_rounds);
    io.number("endpoint_band_scale", e.endpoint_band_scale);
  });
  io.section("workspace", [&] {
    auto& w = c.sim.workspace;
    io.vec3("min_corner", w.min_corner);
    io.vec3("max_corner", w.max_corner);
    io.number("tissue_surface_z", w.tissue_surface_z);
    io.number("jaw_length", w.jaw_length);
    io.number("grasp_capture_radius", w.grasp_capture_radius);
    io.number("insertion_tolerance", w.insertion_tolerance);
    io.number("handover_twist_deg_per_mm", w.handover_twist_deg_per_mm);
    io.vec3("left_home", w.left_home);
    io.vec3("right_home", w.right_home);
    io.vec3("needle_home", w.needle_home);
    io.degrees("canonical_grasp_angle_deg", w.canonical_grasp_angle);
  });
  io.section("controller", [&] {
    auto& k = c.controller;
    io.degrees("insertion_rotation_deg", k.insertion_rotation);
    io.degrees("extraction_rotation_deg", k.extraction_rotation);
    io.degrees("correction_final_rotation_deg", k.correction_final_rotation);
    io.number("approach_offset", k.approach_offset);
    io.number("approach_advance", k.approach_advance);
    io.number("handover_jitter_max", k.handover_jitter_max);
    io.number("extraction_progress_threshold", k.extraction_progress_threshold);
    io.integer("max_retries", k.max_retries);
    io.integer("normal_samples", k.normal_samples);
    io.vec3("correction_corner", k.correction_corner);
    io.number("l_des", k.l_des);
    io.number("l_each", k.l_each);
    io.degrees("handover_normal_epsilon_deg", k.handover_normal_epsilon);
    io.number("insertion_standoff", k.insertion_standoff);
    io.number("extraction_lift", k.extraction_lift);
    io.number("retreat_height", k.retreat_height);
    io.number("sweep_height", k.sweep_height);
    io.number("sweep_margin", k.sweep_margin);
    io.vec3("handover_point", k.handover_point);
    io.vec3("cinch_direction", k.cinch_direction);
    io.integer("perception_attempts", k.perception_attempts);
  });
}

/// Runs a validator that throws std::invalid_argument and rethrows as ConfigError under `field`.
void check(const std::string& field, const std::function<void()>& validator) {
  try {
    validator();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

const char* to_string(Preset p) {
  switch (p) {
    case Preset::sensing_only: return "sensing_only";
    case Preset::thread_handling: return "thread_handling";
    case Preset::stitch: return "stitch";
    case Preset::stitch_human: return "stitch_human";
  }
  return "?";
}

const char* display_name(Preset p) {
  switch (p) {
    case Preset::sensing_only: return "Sensing Only";
    case Preset::thread_handling: return "Thread Handling";
    case Preset::stitch: return "STITCH";
    case Preset::stitch_human: return "STITCH + Human";
  }
  return "?";
}

Preset parse_preset(const std::string& s) {
  for (Preset p : {Preset::sensing_only, Preset::thread_handling, Preset::stitch, Preset::stitch_human}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("experiment.preset",
                    "unknown preset '" + s + "' (expected sensing_only, thread_handling, stitch or stitch_human)");
}

Stages stages_for(Preset p) {
  switch (p) {
    case Preset::sensing_only: return Stages{false, false, false, false};
    case Preset::thread_handling: return Stages{true, true, false, false};
    case Preset::stitch: return Stages{true, true, true, false};
    case Preset::stitch_human: return Stages{true, true, true, true};
  }
  return {};
}

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw ConfigError("experiment.n_trials", "must be >= 1");
  if (jobs < 1) throw ConfigError("experiment.jobs", "must be >= 1");
  check("needle", [&] { sim.needle.validate(); });
  check("wound", [&] { sim.wound.validate(); });
  if (!(sim.thread_length > 0.0)) throw ConfigError("thread.total_length", "must be > 0");
  check("failures", [&] { sim.failures.validate(); });
  check("timing", [&] { sim.timing.validate(); });
  check("perception", [&] { sim.perception.validate(); });
  check("workspace", [&] { sim.workspace.validate(); });
  check("controller", [&] { controller.validate(); });
}

SimConfig ExperimentConfig::effective_sim() const {
  SimConfig s = sim;
  if (preset != Preset::stitch_human) s.failures.intervention_budget = 0;
  return s;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", source + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("", source + ": top level must be an object");

  ExperimentConfig c;
  std::string preset = to_string(c.preset);
  Reader reader(root);
  visit(reader, c, preset);
  reader.finish();
  c.preset = parse_preset(preset);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string config_to_json(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  std::string preset = to_string(c.preset);
  Writer writer;
  visit(writer, c, preset);
  return writer.dump();
}

}  // namespace stitch
