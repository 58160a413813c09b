#include "stitch/controller.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stitch {

namespace {

constexpr std::uint64_t kControllerStream = 0xc0de;

ErrorKind error_kind_of(PipelineState s) {
  switch (s) {
    case PipelineState::Insertion:
    case PipelineState::PoseCorrection: return ErrorKind::I;
    case PipelineState::Extraction: return ErrorKind::E;
    case PipelineState::Handover: return ErrorKind::H;
    default: return ErrorKind::T;
  }
}

[[noreturn]] void fail(PipelineState state, const std::string& detail) {
  throw PrimitiveFailure(state, error_kind_of(state), detail);
}

Vec3 in_plane(const Vec3& v, const Vec3& n) { return v - v.dot(n) * n; }

}  // namespace

void ControllerParams::validate() const {
  auto angle = [](double a, const char* name) {
    if (!(a > 0.0 && a <= kPi)) throw std::invalid_argument(std::string(name) + " must be in (0, 180] degrees");
  };
  auto length = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  angle(insertion_rotation, "insertion_rotation");
  angle(extraction_rotation, "extraction_rotation");
  angle(correction_final_rotation, "correction_final_rotation");
  length(approach_offset, "approach_offset");
  length(approach_advance, "approach_advance");
  length(handover_jitter_max, "handover_jitter_max");
  length(extraction_progress_threshold, "extraction_progress_threshold");
  length(l_des, "l_des");
  length(l_each, "l_each");
  length(insertion_standoff, "insertion_standoff");
  length(extraction_lift, "extraction_lift");
  length(retreat_height, "retreat_height");
  length(sweep_height, "sweep_height");
  length(sweep_margin, "sweep_margin");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (normal_samples < 1) throw std::invalid_argument("normal_samples must be >= 1");
  if (perception_attempts < 1) throw std::invalid_argument("perception_attempts must be >= 1");
  if (!(handover_normal_epsilon >= 0.0)) throw std::invalid_argument("handover_normal_epsilon must be >= 0");
  if (!(std::abs(cinch_direction.norm() - 1.0) < 1e-9)) throw std::invalid_argument("cinch_direction must be a unit vector");
}

InsertionPlan plan_insertion(const NeedlePose& needle, const RigidTransform& gripper_pose, const Point3& entry,
                             const Point3& exit, const ControllerParams& params) {
  const Vec3 d = exit - entry;
  const double chord = d.norm();
  if (!(chord > 1e-9)) throw PlanError("entry and exit points coincide");
  const double r = needle.circle.radius;
  if (chord >= 2.0 * r) throw PlanError("entry/exit distance exceeds the needle diameter");
  const Vec3 dir = d / chord;
  const Vec3 up_raw = in_plane(Vec3::UnitZ(), dir);
  if (up_raw.norm() < 1e-9) throw PlanError("entry-to-exit direction is vertical");
  const Vec3 up = up_raw.normalized();

  // Circle through entry and exit in the vertical plane of the chord, center above the surface.
  const double h = std::sqrt(r * r - 0.25 * chord * chord);
  const Point3 center = 0.5 * (entry + exit) + h * up;
  const UnitVector3 normal = UnitVector3::normalized((entry - center).cross(exit - center));
  const double span = arc_span_of(needle);
  const Vec3 swage_dir = rotation_about_axis(normal, -span).apply_vector(exit - center);

  NeedlePose seated;  // tip at the exit
  seated.circle = Circle3D{center, normal, r};
  seated.swage = center + r * swage_dir.normalized();
  seated.tip = exit;

  const double push = params.insertion_standoff + chord;
  const RigidTransform start_frame = RigidTransform::translation(-push * dir) * needle_frame(seated);
  const RigidTransform target = start_frame * needle_frame(needle).inverse() * gripper_pose;

  InsertionPlan plan;
  plan.direction = dir;
  plan.script.push_back(MoveTo{target});
  plan.script.push_back(Translate{push * dir});
  plan.script.push_back(RotateHeld{normal, params.insertion_rotation, center});
  plan.target = transform_pose(rotation_about_point(normal, params.insertion_rotation, center), seated);
  return plan;
}

Vec3 horizontal_direction(const Vec3& v) {
  const Vec3 h(v.x(), v.y(), 0.0);
  if (h.norm() < 1e-9) return Vec3::UnitX();
  return h.normalized();
}

Mat3 approach_rotation(const Vec3& direction) {
  const Vec3 x = horizontal_direction(direction);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = Vec3::UnitZ().cross(x);
  r.col(2) = Vec3::UnitZ();
  return r;
}

GraspPlan plan_extraction(const NeedlePose& observed, const RigidTransform& left_pose, const ControllerParams& params,
                          double surface_z) {
  const Point3& g = left_pose.translation();
  const bool tip_exposed = observed.tip.z() >= surface_z;
  const bool swage_exposed = observed.swage.z() >= surface_z;
  if (!tip_exposed && !swage_exposed) throw ExtractionPlanError("no exposed needle endpoint");

  GraspPlan plan;
  if (tip_exposed && swage_exposed) {
    plan.regrasp = (observed.tip - g).norm() <= (observed.swage - g).norm() ? observed.tip : observed.swage;
  } else {
    plan.regrasp = tip_exposed ? observed.tip : observed.swage;
  }
  plan.approach_direction = horizontal_direction(plan.regrasp - g);
  plan.approach_pose =
      RigidTransform(approach_rotation(plan.approach_direction), plan.regrasp - params.approach_offset * plan.approach_direction);
  plan.grasp = {SetJaw{Jaw::open}, MoveTo{plan.approach_pose}, Translate{params.approach_advance * plan.approach_direction},
                SetJaw{Jaw::closed}};
  plan.withdraw = {RotateHeld{observed.circle.normal, params.extraction_rotation, observed.circle.center},
                   Translate{params.extraction_lift * Vec3::UnitZ()}};
  return plan;
}

double cinch_length(int i, double l_des, double l_each) {
  if (i < 1) throw std::invalid_argument("suture index must be >= 1");
  const double beta = l_des - (i - 1) * l_each;
  if (beta < 0.0) {
    throw CinchError("cinch length for suture " + std::to_string(i) + " is negative (" + std::to_string(beta) + " m)");
  }
  return beta;
}

double draw_handover_jitter(Rng& rng, double max) {
  const double offset = std::uniform_real_distribution<double>(0.0, max)(rng);
  return offset < max ? offset : std::nextafter(max, 0.0);
}

GraspPlan plan_handover(const NeedlePose& observed, const RigidTransform& left_pose, const RigidTransform& right_pose,
                        const ControllerParams& params, double jitter) {
  const Point3& l = left_pose.translation();
  GraspPlan plan;
  plan.regrasp = (observed.tip - l).norm() > (observed.swage - l).norm() ? observed.tip : observed.swage;
  plan.approach_direction = horizontal_direction(plan.regrasp - right_pose.translation());
  const Vec3 lateral = Vec3::UnitZ().cross(plan.approach_direction);
  plan.approach_pose = RigidTransform(approach_rotation(plan.approach_direction),
                                     plan.regrasp - params.approach_offset * plan.approach_direction + jitter * lateral);
  plan.grasp = {SetJaw{Jaw::open}, MoveTo{plan.approach_pose}, Translate{params.approach_advance * plan.approach_direction},
                SetJaw{Jaw::closed}};
  return plan;
}

Recovery recover_extraction(const NeedlePose& before, const NeedlePose& after, const ControllerParams& params,
                            int retries_used) {
  if (pose_agreement(before, after).endpoint_dist >= params.extraction_progress_threshold) return Recovery::proceed;
  return retries_used >= params.max_retries ? Recovery::fail : Recovery::retry;
}

Recovery recover_handover(const UnitVector3& before_normal, const UnitVector3& after_normal,
                          const ControllerParams& params) {
  const double change = axial_angle_between(before_normal.vec(), after_normal.vec());
  return change > params.handover_normal_epsilon ? Recovery::retry : Recovery::proceed;
}

UnitVector3 aggregate_normals(std::span<const UnitVector3> normals) {
  if (normals.empty()) throw std::invalid_argument("no normals to aggregate");
  const Vec3& ref = normals.front().vec();
  Vec3 sum = Vec3::Zero();
  for (const auto& n : normals) sum += n.vec().dot(ref) < 0.0 ? Vec3(-n.vec()) : n.vec();
  return UnitVector3::normalized(sum);
}

NeedlePose label_observation(const NeedlePose& observed, const NeedlePose& predicted, const NeedleSpec& spec) {
  const UnitVector3 n =
      observed.circle.normal.dot(predicted.circle.normal) < 0.0 ? -observed.circle.normal : observed.circle.normal;
  const double straight = (observed.tip - predicted.tip).norm() + (observed.swage - predicted.swage).norm();
  const double swapped = (observed.swage - predicted.tip).norm() + (observed.tip - predicted.swage).norm();
  const Point3& tip = straight <= swapped ? observed.tip : observed.swage;
  const Point3& swage = straight <= swapped ? observed.swage : observed.tip;

  // Both endpoints vote for the swage direction.
  const Point3& c = observed.circle.center;
  const Vec3 from_swage = in_plane(swage - c, n.vec());
  const Vec3 from_tip = rotation_about_axis(n, -spec.arc_span).apply_vector(in_plane(tip - c, n.vec()));
  Vec3 u = from_swage.normalized() + from_tip.normalized();
  if (u.norm() < 1e-9) u = from_swage;
  NeedleSpec s = spec;
  s.radius = observed.circle.radius;
  return make_needle_pose(c, n, u, s);
}

Controller::Controller(const ControllerParams& params, const Stages& stages, std::uint64_t seed)
    : params_(params), stages_(stages), rng_(make_rng(seed, kControllerStream)) {
  params_.validate();
}

Event& Controller::emit(const World& world, EventType type, PipelineState state, const std::string& detail) {
  Event e;
  e.time = world.clock();
  e.suture = suture_;
  e.type = type;
  e.state = state;
  e.thread_pulled = world.thread().pulled_through;
  e.detail = detail;
  events_.push_back(std::move(e));
  return events_.back();
}

void Controller::transition(const World& world, PipelineState from, PipelineState to) {
  Event& e = emit(world, EventType::transition, from);
  e.to = to;
}

void Controller::exec(World& world, GripperId id, const Motion& motion, PipelineState state) {
  const RigidTransform before = world.gripper(id).pose;
  try {
    world.execute(id, motion);
  } catch (const MotionError& e) {
    fail(state, e.what());
  }
  emit(world, EventType::motion, state, std::string(to_string(id)) + " " + motion_name(motion));
  if (holder_ == id && belief_ && !std::holds_alternative<SetJaw>(motion)) {
    belief_ = transform_pose(motion_transform(before, motion), *belief_);
  }
}

std::optional<NeedlePose> Controller::try_observe(World& world, PipelineState state) {
  NeedlePose raw;
  try {
    raw = world.observe();
  } catch (const PerceptionError& e) {
    emit(world, EventType::perception_failure, state, e.what());
    return std::nullopt;
  }
  emit(world, EventType::observation, state);
  const NeedlePose predicted = belief_ ? *belief_ : world.nominal_needle_pose();
  return label_observation(raw, predicted, world.needle_spec());
}

NeedlePose Controller::observe_or_fail(World& world, PipelineState state, ErrorKind kind) {
  for (int k = 0; k < params_.perception_attempts; ++k) {
    if (auto obs = try_observe(world, state)) return *obs;
  }
  throw PrimitiveFailure(state, kind, "needle pose could not be estimated");
}

void Controller::set_belief(const NeedlePose& pose, std::optional<GripperId> holder) {
  belief_ = pose;
  holder_ = holder;
  corrected_ = false;
}

void Controller::reset_belief(const World& world) {
  belief_ = world.nominal_needle_pose();
  holder_ = GripperId::right;
  swept_ = false;
  corrected_ = false;
}

void Controller::insertion(World& world) {
  const auto P = PipelineState::Insertion;
  if (!corrected_) belief_ = observe_or_fail(world, P, ErrorKind::I);
  corrected_ = false;

  const auto idx = static_cast<std::size_t>(suture_ - 1);
  const Point3& entry = world.wound().entry_points.at(idx);
  const Point3& exit = world.wound().exit_points.at(idx);
  InsertionPlan plan;
  try {
    plan = plan_insertion(*belief_, world.gripper(GripperId::right).pose, entry, exit, params_);
  } catch (const PlanError& e) {
    fail(P, e.what());
  }
  for (const auto& m : plan.script) exec(world, GripperId::right, m, P);
  belief_ = plan.target;

  const InsertionResult result = world.tissue_pass_check(entry, exit);
  if (result != InsertionResult::ok) fail(P, std::string("insertion failed: ") + to_string(result));

  exec(world, GripperId::right, SetJaw{Jaw::open}, P);
  holder_.reset();
  exec(world, GripperId::right, Translate{params_.retreat_height * Vec3::UnitZ()}, P);
}

void Controller::sweep_thread(World& world) {
  const auto P = PipelineState::Sweep;
  const WoundSpec& w = world.wound();
  const Vec3 axis = w.wound_axis.vec();
  const Point3 first = 0.5 * (w.entry_points.front() + w.exit_points.front());
  const Point3 last = 0.5 * (w.entry_points.back() + w.exit_points.back());
  const double length = (last - first).dot(axis) + 2.0 * params_.sweep_margin;
  const Point3 start = first - params_.sweep_margin * axis + params_.sweep_height * Vec3::UnitZ();

  exec(world, GripperId::right, SetJaw{Jaw::open}, P);
  exec(world, GripperId::right, MoveTo{RigidTransform(approach_rotation(axis), start)}, P);
  exec(world, GripperId::right, Translate{length * axis}, P);
  exec(world, GripperId::right, Translate{params_.retreat_height * Vec3::UnitZ()}, P);
  swept_ = true;
}

void Controller::extraction(World& world) {
  const auto P = PipelineState::Extraction;
  const bool swept = swept_;
  swept_ = false;
  if (world.thread_entanglement_check(swept) == EntanglementResult::entangled) {
    throw PrimitiveFailure(P, ErrorKind::T, "thread entangled with the needle");
  }
  const double surface = world.wound().entry_points.at(static_cast<std::size_t>(suture_ - 1)).z();

  for (int retries = 0;; ) {
    Recovery decision = retries >= params_.max_retries ? Recovery::fail : Recovery::retry;
    double progress = 0.0;
    if (auto before = try_observe(world, P)) {
      belief_ = *before;
      GraspPlan plan;
      bool planned = true;
      try {
        plan = plan_extraction(*before, world.gripper(GripperId::left).pose, params_, surface);
      } catch (const ExtractionPlanError&) {
        planned = false;
      }
      if (planned) {
        for (const auto& m : plan.grasp) exec(world, GripperId::left, m, P);
        emit(world, EventType::grasp, P, "left");
        holder_ = GripperId::left;
        for (const auto& m : plan.withdraw) exec(world, GripperId::left, m, P);
        if (auto after = try_observe(world, P)) {
          progress = pose_agreement(*before, *after).endpoint_dist;
          decision = recover_extraction(*before, *after, params_, retries);
          if (decision == Recovery::proceed) {
            belief_ = *after;
            Event& e = emit(world, EventType::observation, P, "extraction progress");
            e.progress = progress;
            return;
          }
        }
        exec(world, GripperId::left, SetJaw{Jaw::open}, P);
        holder_.reset();
        belief_ = *before;
      }
    }
    if (decision == Recovery::fail) {
      throw PrimitiveFailure(P, ErrorKind::E,
                             "needle not extracted after " + std::to_string(retries) + " retries");
    }
    ++retries;
    retries_ = std::max(retries_, retries);
    Event& e = emit(world, EventType::retry, P);
    e.to = P;
    e.retries = retries;
    e.progress = progress;
  }
}

void Controller::cinch(World& world) {
  const auto P = PipelineState::Cinch;
  double beta = 0.0;
  try {
    beta = cinch_length(suture_, params_.l_des, params_.l_each);
    world.pull_thread(beta);
  } catch (const CinchError& e) {
    fail(P, e.what());
  } catch (const ThreadError& e) {
    fail(P, e.what());
  }
  Event& e = emit(world, EventType::cinch, P);
  e.thread_length = beta;
  exec(world, GripperId::left, Translate{beta * params_.cinch_direction}, P);
  exec(world, GripperId::left, Translate{-beta * params_.cinch_direction}, P);
}

void Controller::handover(World& world) {
  const auto P = PipelineState::Handover;
  exec(world, GripperId::left, Translate{params_.handover_point - belief_->circle.center}, P);

  for (int retries = 0;; ) {
    std::string why;
    if (auto before = try_observe(world, P)) {
      belief_ = *before;
      const double jitter = retries > 0 ? draw_handover_jitter(rng_, params_.handover_jitter_max) : 0.0;
      const GraspPlan plan = plan_handover(*before, world.gripper(GripperId::left).pose,
                                           world.gripper(GripperId::right).pose, params_, jitter);
      for (std::size_t k = 0; k + 1 < plan.grasp.size(); ++k) exec(world, GripperId::right, plan.grasp[k], P);
      world.set_dual_grasp_window(true);
      exec(world, GripperId::right, plan.grasp.back(), P);
      Event& g = emit(world, EventType::grasp, P, "right");
      g.jitter = jitter;

      const bool feedback = world.grasp_feedback(GripperId::right);
      const auto after = try_observe(world, P);
      if (feedback && after && recover_handover(before->circle.normal, after->circle.normal, params_) == Recovery::proceed) {
        exec(world, GripperId::left, SetJaw{Jaw::open}, P);
        world.set_dual_grasp_window(false);
        holder_ = GripperId::right;
        belief_ = *after;
        exec(world, GripperId::left, Translate{params_.retreat_height * Vec3::UnitZ()}, P);
        return;
      }
      if (!feedback) {
        why = "no grasp";
      } else if (after) {
        char text[64];
        std::snprintf(text, sizeof text, "normal changed %.2f deg",
                      rad_to_deg(axial_angle_between(before->circle.normal.vec(), after->circle.normal.vec())));
        why = text;
      }
      exec(world, GripperId::right, SetJaw{Jaw::open}, P);
      world.set_dual_grasp_window(false);
      exec(world, GripperId::right, Translate{-params_.approach_offset * plan.approach_direction}, P);
    }
    if (retries >= params_.max_retries) {
      throw PrimitiveFailure(P, ErrorKind::H, "handover failed after " + std::to_string(retries) + " retries");
    }
    ++retries;
    retries_ = std::max(retries_, retries);
    Event& e = emit(world, EventType::retry, P, why);
    e.to = P;
    e.retries = retries;
  }
}

void Controller::pose_correction(World& world) {
  const auto P = PipelineState::PoseCorrection;
  exec(world, GripperId::right, Translate{params_.correction_corner - belief_->circle.center}, P);

  std::vector<UnitVector3> normals;
  Point3 center_sum = Point3::Zero();
  Vec3 swage_sum = Vec3::Zero();
  int failures = 0;
  for (int k = 0; k < params_.normal_samples; ++k) {
    NeedlePose raw;
    try {
      raw = world.observe();
    } catch (const PerceptionError& e) {
      ++failures;
      emit(world, EventType::perception_failure, P, e.what());
      continue;
    }
    emit(world, EventType::observation, P);
    const NeedlePose labeled = label_observation(raw, *belief_, world.needle_spec());
    normals.push_back(raw.circle.normal);
    center_sum += raw.circle.center;
    swage_sum += (labeled.swage - labeled.circle.center).normalized();
  }
  if (2 * failures > params_.normal_samples) {
    fail(P, "pose correction: " + std::to_string(failures) + " of " + std::to_string(params_.normal_samples) +
                " observations failed");
  }

  const UnitVector3 mean_normal = aggregate_normals(normals);
  const Point3 center = center_sum / static_cast<double>(normals.size());
  const UnitVector3 physical = mean_normal.dot(belief_->circle.normal) < 0.0 ? -mean_normal : mean_normal;
  belief_ = make_needle_pose(center, physical, in_plane(swage_sum, physical.vec()),
                             NeedleSpec{belief_->circle.radius, world.needle_spec().arc_span});

  const Eigen::AngleAxisd align(align_vectors(mean_normal, UnitVector3::unit_y()).rotation());
  if (align.angle() > 1e-12) {
    exec(world, GripperId::right, RotateHeld{UnitVector3::normalized(align.axis()), align.angle(), center}, P);
  }
  exec(world, GripperId::right, RotateHeld{UnitVector3::unit_y(), params_.correction_final_rotation, center}, P);
  corrected_ = true;
}

StepOutcome Controller::run_suture(World& world, int i) {
  events_.clear();
  suture_ = i;
  retries_ = 0;
  world.set_suture_index(i);
  if (!belief_) reset_belief(world);

  StepOutcome out;
  out.state_before = PipelineState::Insertion;
  for (;;) {
    emit(world, EventType::attempt_start, PipelineState::Insertion);
    PipelineState current = PipelineState::Insertion;
    auto enter = [&](PipelineState next) {
      transition(world, current, next);
      current = next;
    };
    try {
      insertion(world);
      if (stages_.sweep) {
        enter(PipelineState::Sweep);
        sweep_thread(world);
      }
      enter(PipelineState::Extraction);
      extraction(world);
      if (stages_.cinch) {
        enter(PipelineState::Cinch);
        cinch(world);
      }
      enter(PipelineState::Handover);
      handover(world);
      if (stages_.pose_correction) {
        enter(PipelineState::PoseCorrection);
        pose_correction(world);
      }
      enter(PipelineState::Done);
      emit(world, EventType::suture_done, PipelineState::Done);
      out.state_after = PipelineState::Done;
      out.error.reset();
      break;
    } catch (const PrimitiveFailure& f) {
      Event& e = emit(world, EventType::error, f.state(), f.what());
      e.error = f.kind();
      Event& t = emit(world, EventType::transition, f.state());
      t.to = PipelineState::Failed;
      t.error = f.kind();
      out.error = f.kind();
      if (stages_.human_mode && world.intervention_budget() > 0) {
        world.human_intervention();
        Event& h = emit(world, EventType::intervention, PipelineState::Failed);
        h.intervention = true;
        transition(world, PipelineState::Failed, PipelineState::Insertion);
        reset_belief(world);
        continue;
      }
      out.state_after = PipelineState::Failed;
      break;
    }
  }
  out.retries_used = retries_;
  out.events = events_;
  return out;
}

}  // namespace stitch
