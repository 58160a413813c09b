#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stitch/geometry.hpp"
#include "stitch/perception.hpp"
#include "stitch/rng.hpp"
#include "stitch/simworld.hpp"
#include "stitch/trace.hpp"

namespace stitch {

struct ControllerParams {
  double insertion_rotation = deg_to_rad(45.0);
  double extraction_rotation = deg_to_rad(80.0);
  double correction_final_rotation = deg_to_rad(90.0);
  double approach_offset = 0.01;
  double approach_advance = 0.015;
  double handover_jitter_max = 0.005;
  double extraction_progress_threshold = 0.02;
  int max_retries = 5;
  int normal_samples = 10;
  Point3 correction_corner = Point3(0.05, -0.05, 0.03);
  double l_des = 0.10;
  double l_each = 0.015;

  /// Normal change (radians) above which a handover grasp is judged to have disturbed the needle.
  double handover_normal_epsilon = deg_to_rad(0.5);
  /// The tip starts this far short of the entry point before it is pushed in.
  double insertion_standoff = 0.005;
  double extraction_lift = 0.03;
  double retreat_height = 0.03;
  double sweep_height = 0.004;
  double sweep_margin = 0.01;
  Point3 handover_point = Point3(0.0, 0.0, 0.05);
  Vec3 cinch_direction = Vec3(-2.0, 0.0, 1.0).normalized();
  /// Observation attempts before a primitive outside the retry loops gives up.
  int perception_attempts = 3;

  void validate() const;
};

/// Which optional primitives run, and whether failures may be handed to a human.
struct Stages {
  bool sweep = true;
  bool cinch = true;
  bool pose_correction = true;
  bool human_mode = false;

  bool operator==(const Stages&) const = default;
};

enum class Recovery { proceed, retry, fail };

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ExtractionPlanError : public PlanError {
 public:
  using PlanError::PlanError;
};
class CinchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Terminal failure of a primitive, already classified.
class PrimitiveFailure : public std::runtime_error {
 public:
  PrimitiveFailure(PipelineState state, ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), state_(state), kind_(kind) {}
  PipelineState state() const { return state_; }
  ErrorKind kind() const { return kind_; }

 private:
  PipelineState state_;
  ErrorKind kind_;
};

struct InsertionPlan {
  Vec3 direction = Vec3::UnitX();
  /// move_to (tip short of the entry), translate along `direction`, rotate_held.
  std::vector<Motion> script;
  /// Believed needle pose once the script has run.
  NeedlePose target;
};

/// `gripper_pose` is the pose of the gripper holding `needle`.
InsertionPlan plan_insertion(const NeedlePose& needle, const RigidTransform& gripper_pose, const Point3& entry,
                             const Point3& exit, const ControllerParams& params);

struct GraspPlan {
  Point3 regrasp = Point3::Zero();
  Vec3 approach_direction = Vec3::UnitX();
  RigidTransform approach_pose;
  /// open, move_to, translate, close.
  std::vector<Motion> grasp;
  /// Extraction only: rotate_held then the pull clear of the tissue.
  std::vector<Motion> withdraw;
};

/// Horizontal unit vector along `v` (z removed); +x when `v` is vertical.
Vec3 horizontal_direction(const Vec3& v);

/// Tool orientation approaching along the horizontal `direction` with +z up.
Mat3 approach_rotation(const Vec3& direction);

GraspPlan plan_extraction(const NeedlePose& observed, const RigidTransform& left_pose, const ControllerParams& params,
                          double surface_z = 0.0);

double cinch_length(int i, double l_des, double l_each);

/// Lateral approach offset, uniform in [0, max).
double draw_handover_jitter(Rng& rng, double max);

GraspPlan plan_handover(const NeedlePose& observed, const RigidTransform& left_pose, const RigidTransform& right_pose,
                        const ControllerParams& params, double jitter = 0.0);

Recovery recover_extraction(const NeedlePose& before, const NeedlePose& after, const ControllerParams& params,
                            int retries_used);
Recovery recover_handover(const UnitVector3& before_normal, const UnitVector3& after_normal,
                          const ControllerParams& params);

/// Sign-aligns each normal with the first, then returns the normalized mean.
UnitVector3 aggregate_normals(std::span<const UnitVector3> normals);

/// Labels an estimate (geometric endpoints, sign-normalized normal) as a
/// physical pose using a predicted physical pose.
NeedlePose label_observation(const NeedlePose& observed, const NeedlePose& predicted, const NeedleSpec& spec);

struct StepOutcome {
  PipelineState state_before = PipelineState::Insertion;
  PipelineState state_after = PipelineState::Insertion;
  int retries_used = 0;
  EventTrace events;
  std::optional<ErrorKind> error;
};

class Controller {
 public:
  Controller(const ControllerParams& params, const Stages& stages, std::uint64_t seed);

  /// Runs suture `i` to Done or a terminal Failed, intervening in human mode.
  StepOutcome run_suture(World& world, int i);

  const ControllerParams& params() const { return params_; }
  const Stages& stages() const { return stages_; }
  const std::optional<NeedlePose>& belief() const { return belief_; }
  /// Replaces the tracked needle pose and the gripper believed to hold it.
  void set_belief(const NeedlePose& pose, std::optional<GripperId> holder);

  // Individual primitives; each throws PrimitiveFailure on a terminal failure.
  // They act on suture `suture()` and append to events().
  void insertion(World& world);
  void sweep_thread(World& world);
  void extraction(World& world);
  void cinch(World& world);
  void handover(World& world);
  void pose_correction(World& world);

  const EventTrace& events() const { return events_; }
  int suture() const { return suture_; }
  void set_suture(int i) { suture_ = i; }

 private:
  Event& emit(const World& world, EventType type, PipelineState state, const std::string& detail = "");
  void transition(const World& world, PipelineState from, PipelineState to);
  void exec(World& world, GripperId id, const Motion& motion, PipelineState state);
  std::optional<NeedlePose> try_observe(World& world, PipelineState state);
  NeedlePose observe_or_fail(World& world, PipelineState state, ErrorKind kind);
  void reset_belief(const World& world);

  ControllerParams params_;
  Stages stages_;
  Rng rng_;
  EventTrace events_;
  int suture_ = 1;
  int retries_ = 0;
  std::optional<NeedlePose> belief_;
  std::optional<GripperId> holder_;
  bool swept_ = false;
  bool corrected_ = false;
};

}  // namespace stitch
