#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "stitch/geometry.hpp"
#include "stitch/perception.hpp"
#include "stitch/rng.hpp"

namespace stitch {

enum class GripperId { left = 0, right = 1 };
enum class Jaw { open, closed };

const char* to_string(GripperId id);
inline GripperId other(GripperId id) { return id == GripperId::left ? GripperId::right : GripperId::left; }

struct NeedleHold {
  Point3 grasp_point = Point3::Zero();
  double arc_angle = 0.0;
  /// Needle frame expressed in the tool frame; fixed while held.
  RigidTransform needle_in_tool;

  bool operator==(const NeedleHold&) const = default;
};
struct ThreadHold {
  bool operator==(const ThreadHold&) const = default;
};
using Holding = std::variant<std::monostate, NeedleHold, ThreadHold>;

/// Tool frame: translation is the jaw tip, local +x the approach direction.
/// The jaws extend from the tip back along -x for `jaw_length`.
struct GripperState {
  GripperId id = GripperId::left;
  RigidTransform pose;
  Jaw jaw = Jaw::open;
  Holding holding;

  bool holds_needle() const { return std::holds_alternative<NeedleHold>(holding); }
  bool operator==(const GripperState&) const = default;
};

struct WoundSpec {
  std::vector<Point3> entry_points;
  std::vector<Point3> exit_points;
  UnitVector3 wound_axis = UnitVector3::unit_y();
  int n_target_sutures = 6;

  void validate() const;
  /// Sutures across a ridge along +y at x = 0, entries at +x, exits at -x,
  /// `bite` apart, `spacing` between sutures.
  static WoundSpec standard(int n_sutures = 6, double spacing = 0.01, double bite = 0.016);
  bool operator==(const WoundSpec&) const = default;
};

struct ThreadState {
  double total_length = 0.40;
  double pulled_through = 0.0;
  std::vector<double> per_suture_used;
  bool attached_to_swage = true;

  bool operator==(const ThreadState&) const = default;
};

struct FailureModel {
  double grasp_miss_base = 0.05;
  double grasp_miss_per_mm_pose_error = 0.04;
  double entanglement_prob_unswept = 0.25;
  double entanglement_prob_swept = 0.05;
  double insertion_slip_prob = 0.05;
  double perception_corruption_prob = 0.10;
  int intervention_budget = 2;

  void validate() const;
};

struct TimingModel {
  double perception_period = 1.5;
  /// Seconds per motion primitive: move_to, rotate_held, translate, jaw,
  /// pull_thread, intervention.
  std::map<std::string, double> durations = {
      {"move_to", 8.0}, {"rotate_held", 5.0}, {"translate", 4.0},
      {"jaw", 1.5},     {"pull_thread", 6.0}, {"intervention", 30.0},
  };

  double duration(const std::string& primitive) const;
  void validate() const;
};

/// How rendered observations degrade with where the needle is in the scene.
struct PerceptionModel {
  NoiseModel noise{0.0001, 0.15, Vec3(0.06, 0.06, 0.06), 0.0, 0.0, 0.5};
  int n_points = 150;
  EstimatorParams estimator;
  /// Observations are best within `view_radius` of `view_corner`.
  Point3 view_corner = Point3(0.05, -0.05, 0.03);
  double view_radius = 0.02;
  double off_corner_noise_scale = 2.0;
  double corner_corruption_scale = 0.2;
  /// Corrupted estimates are rotated/translated by uniform draws in these ranges.
  double corruption_min_deg = 5.0;
  double corruption_max_deg = 25.0;
  double corruption_min_shift = 0.001;
  double corruption_max_shift = 0.005;
  /// Jaws hide this much arc on each side of a grasp point.
  double jaw_occlusion_half_arc = 0.08;
  /// Less visible arc than this yields a perception failure.
  double min_visible_arc = deg_to_rad(17.0);

  void validate() const;
};

struct WorkspaceModel {
  Point3 min_corner = Point3(-0.12, -0.12, -0.03);
  Point3 max_corner = Point3(0.12, 0.12, 0.15);
  double tissue_surface_z = 0.0;
  double jaw_length = 0.01;
  double grasp_capture_radius = 0.008;
  double insertion_tolerance = 0.002;
  /// A grasp landing d mm off the jaw center twists an already-held needle this much.
  double handover_twist_deg_per_mm = 0.2;
  Point3 left_home = Point3(-0.06, 0.0, 0.06);
  Point3 right_home = Point3(0.06, 0.0, 0.06);
  /// Needle center when seated in the right gripper at the start or after an intervention.
  Point3 needle_home = Point3(0.05, -0.05, 0.03);
  /// Arc angle (from the swage) of the canonical right-gripper grasp.
  double canonical_grasp_angle = 0.35;

  void validate() const;
  bool contains(const Point3& p) const;
};

struct SimConfig {
  NeedleSpec needle;
  FailureModel failures;
  TimingModel timing;
  PerceptionModel perception;
  WorkspaceModel workspace;
  WoundSpec wound = WoundSpec::standard();
  double thread_length = 0.40;

  void validate() const;
};

/// Ground truth. The needle lives in its own frame (origin at the circle
/// center, +z the normal, +x toward the swage, tip at arc angle arc_span).
struct WorldState {
  NeedleSpec needle_spec;
  RigidTransform needle_frame;
  std::array<GripperState, 2> grippers;
  ThreadState thread;
  WoundSpec wound;
  int suture_index = 1;
  double clock = 0.0;
  Rng rng;
  bool needle_in_tissue = false;
  bool needle_dropped = false;
  bool dual_grasp_window = false;
  bool entangled = false;
  int intervention_budget = 0;
  std::vector<int> intervention_sutures;

  NeedlePose needle_true() const;
  const GripperState& gripper(GripperId id) const { return grippers[static_cast<int>(id)]; }
  GripperState& gripper(GripperId id) { return grippers[static_cast<int>(id)]; }

  bool operator==(const WorldState&) const = default;
};

struct MoveTo {
  RigidTransform target;
};
struct RotateHeld {
  UnitVector3 axis;
  double angle = 0.0;
  Point3 pivot = Point3::Zero();
};
struct Translate {
  Vec3 offset = Vec3::Zero();
};
struct SetJaw {
  Jaw jaw = Jaw::open;
};
using Motion = std::variant<MoveTo, RotateHeld, Translate, SetJaw>;

const char* motion_name(const Motion& m);

/// World-frame rigid motion the gripper undergoes; identity for jaw commands.
RigidTransform motion_transform(const RigidTransform& gripper_pose, const Motion& m);

class PerceptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class MotionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ThreadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InsertionResult { ok, missed_wound, bad_exit, slipped };
const char* to_string(InsertionResult r);

enum class EntanglementResult { clear, entangled };

/// Result of a jaw close, for callers and tests; the controller itself only
/// sees `grasp_feedback`.
struct GraspReport {
  double distance = 0.0;
  double success_probability = 0.0;
  bool attempted = false;
  bool success = false;
};

/// Operation contract the controller drives. SimWorld is the ground-truth
/// implementation; tests substitute scripted worlds.
class World {
 public:
  virtual ~World() = default;

  /// Estimated needle pose (geometric endpoint order, sign-normalized normal).
  virtual NeedlePose observe() = 0;
  virtual void execute(GripperId id, const Motion& motion) = 0;
  virtual InsertionResult tissue_pass_check(const Point3& entry, const Point3& exit) = 0;
  virtual EntanglementResult thread_entanglement_check(bool swept) = 0;
  virtual void pull_thread(double length) = 0;
  virtual void human_intervention() = 0;
  /// Jaw-angle proprioception: true when closed jaws are holding something.
  virtual bool grasp_feedback(GripperId id) const = 0;
  virtual void set_dual_grasp_window(bool open) = 0;

  virtual const GripperState& gripper(GripperId id) const = 0;
  virtual const WoundSpec& wound() const = 0;
  virtual const NeedleSpec& needle_spec() const = 0;
  virtual const ThreadState& thread() const = 0;
  virtual double clock() const = 0;
  virtual int suture_index() const = 0;
  virtual void set_suture_index(int i) = 0;
  virtual int intervention_budget() const = 0;
  /// Needle pose the world re-seats after an intervention (known to the controller).
  virtual NeedlePose nominal_needle_pose() const = 0;
};

class SimWorld : public World {
 public:
  SimWorld(const SimConfig& config, std::uint64_t seed);

  NeedlePose observe() override;
  void execute(GripperId id, const Motion& motion) override;
  InsertionResult tissue_pass_check(const Point3& entry, const Point3& exit) override;
  EntanglementResult thread_entanglement_check(bool swept) override;
  void pull_thread(double length) override;
  void human_intervention() override;
  bool grasp_feedback(GripperId id) const override;
  void set_dual_grasp_window(bool open) override;

  const GripperState& gripper(GripperId id) const override { return state_.gripper(id); }
  const WoundSpec& wound() const override { return state_.wound; }
  const NeedleSpec& needle_spec() const override { return state_.needle_spec; }
  const ThreadState& thread() const override { return state_.thread; }
  double clock() const override { return state_.clock; }
  int suture_index() const override { return state_.suture_index; }
  void set_suture_index(int i) override;
  int intervention_budget() const override { return state_.intervention_budget; }
  NeedlePose nominal_needle_pose() const override;

  const WorldState& state() const { return state_; }
  WorldState& mutable_state() { return state_; }
  const SimConfig& config() const { return config_; }
  const GraspReport& last_grasp() const { return last_grasp_; }

  /// Arc intervals currently hidden by tissue and jaws.
  std::vector<ArcInterval> hidden_arcs() const;
  /// Distance from the needle body to the jaw segment of `g`, and the arc angle attaining it.
  std::pair<double, double> jaw_to_needle(const GripperState& g) const;
  /// Success probability of a grasp at distance `d` meters, clamped to [0, 1].
  double grasp_success_probability(double d) const;

 private:
  void reset_to_home();
  void advance(double seconds);
  void sync_needle_to_holder();
  void refresh_tissue_state();
  void check_invariants() const;
  double distance_to_arc(const Point3& p, double* arc_angle = nullptr) const;

  SimConfig config_;
  WorldState state_;
  GraspReport last_grasp_;
};

}  // namespace stitch
