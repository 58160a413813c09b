#include "stitch/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stitch {

namespace {

constexpr std::uint64_t kWorldStream = 0x3011d;
constexpr int kArcSamples = 720;

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    if (v.norm() > 1e-9) return v.normalized();
  }
}

double segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

}  // namespace

const char* to_string(GripperId id) { return id == GripperId::left ? "left" : "right"; }

const char* to_string(InsertionResult r) {
  switch (r) {
    case InsertionResult::ok: return "ok";
    case InsertionResult::missed_wound: return "missed_wound";
    case InsertionResult::bad_exit: return "bad_exit";
    case InsertionResult::slipped: return "slipped";
  }
  return "?";
}

const char* motion_name(const Motion& m) {
  switch (m.index()) {
    case 0: return "move_to";
    case 1: return "rotate_held";
    case 2: return "translate";
    default: return "jaw";
  }
}

RigidTransform motion_transform(const RigidTransform& gripper_pose, const Motion& m) {
  if (const auto* mv = std::get_if<MoveTo>(&m)) return mv->target * gripper_pose.inverse();
  if (const auto* rot = std::get_if<RotateHeld>(&m)) return rotation_about_point(rot->axis, rot->angle, rot->pivot);
  if (const auto* tr = std::get_if<Translate>(&m)) return RigidTransform::translation(tr->offset);
  return RigidTransform::identity();
}

void WoundSpec::validate() const {
  if (entry_points.empty()) throw std::invalid_argument("wound needs at least one suture");
  if (entry_points.size() != exit_points.size()) throw std::invalid_argument("entry/exit point counts differ");
  if (n_target_sutures != static_cast<int>(entry_points.size())) {
    throw std::invalid_argument("n_target_sutures must equal the number of entry points");
  }
  for (std::size_t k = 0; k < entry_points.size(); ++k) {
    if ((entry_points[k] - exit_points[k]).norm() < 1e-9) {
      throw std::invalid_argument("entry and exit points coincide for suture " + std::to_string(k + 1));
    }
  }
}

WoundSpec WoundSpec::standard(int n_sutures, double spacing, double bite) {
  if (n_sutures < 1) throw std::invalid_argument("n_sutures must be >= 1");
  WoundSpec w;
  const double y0 = -0.5 * spacing * (n_sutures - 1);
  for (int k = 0; k < n_sutures; ++k) {
    const double y = y0 + spacing * k;
    w.entry_points.emplace_back(0.5 * bite, y, 0.0);
    w.exit_points.emplace_back(-0.5 * bite, y, 0.0);
  }
  w.n_target_sutures = n_sutures;
  return w;
}

void FailureModel::validate() const {
  require_probability(grasp_miss_base, "grasp_miss_base");
  require_probability(grasp_miss_per_mm_pose_error, "grasp_miss_per_mm_pose_error");
  require_probability(entanglement_prob_unswept, "entanglement_prob_unswept");
  require_probability(entanglement_prob_swept, "entanglement_prob_swept");
  require_probability(insertion_slip_prob, "insertion_slip_prob");
  require_probability(perception_corruption_prob, "perception_corruption_prob");
  if (entanglement_prob_swept > entanglement_prob_unswept) {
    throw std::invalid_argument("entanglement_prob_swept must not exceed entanglement_prob_unswept");
  }
  if (intervention_budget < 0) throw std::invalid_argument("intervention_budget must be >= 0");
}

double TimingModel::duration(const std::string& primitive) const {
  const auto it = durations.find(primitive);
  if (it == durations.end()) throw std::invalid_argument("no duration configured for '" + primitive + "'");
  return it->second;
}

void TimingModel::validate() const {
  require_positive(perception_period, "perception_period");
  for (const auto& [name, seconds] : durations) {
    if (!(seconds > 0.0) || !std::isfinite(seconds)) throw std::invalid_argument("duration '" + name + "' must be > 0");
  }
  for (const char* name : {"move_to", "rotate_held", "translate", "jaw", "pull_thread", "intervention"}) {
    duration(name);
  }
}

void PerceptionModel::validate() const {
  noise.validate();
  estimator.plane.validate();
  estimator.circle.validate();
  if (n_points < 3) throw std::invalid_argument("perception n_points must be >= 3");
  require_positive(view_radius, "view_radius");
  require_positive(off_corner_noise_scale, "off_corner_noise_scale");
  if (!(corner_corruption_scale >= 0.0)) throw std::invalid_argument("corner_corruption_scale must be >= 0");
  if (!(corruption_min_deg >= 0.0 && corruption_max_deg >= corruption_min_deg)) {
    throw std::invalid_argument("corruption degree range is invalid");
  }
  if (!(corruption_min_shift >= 0.0 && corruption_max_shift >= corruption_min_shift)) {
    throw std::invalid_argument("corruption shift range is invalid");
  }
  if (!(jaw_occlusion_half_arc >= 0.0)) throw std::invalid_argument("jaw_occlusion_half_arc must be >= 0");
  if (!(min_visible_arc >= 0.0)) throw std::invalid_argument("min_visible_arc must be >= 0");
}

void WorkspaceModel::validate() const {
  if (!(min_corner.array() < max_corner.array()).all()) throw std::invalid_argument("workspace bounds are empty");
  require_positive(jaw_length, "jaw_length");
  require_positive(grasp_capture_radius, "grasp_capture_radius");
  require_positive(insertion_tolerance, "insertion_tolerance");
  if (!(handover_twist_deg_per_mm >= 0.0)) throw std::invalid_argument("handover_twist_deg_per_mm must be >= 0");
  if (!contains(left_home) || !contains(right_home)) throw std::invalid_argument("home poses lie outside the workspace");
}

bool WorkspaceModel::contains(const Point3& p) const {
  return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
}

void SimConfig::validate() const {
  needle.validate();
  failures.validate();
  timing.validate();
  perception.validate();
  workspace.validate();
  wound.validate();
  require_positive(thread_length, "thread_length");
}

NeedlePose WorldState::needle_true() const {
  const Mat3& r = needle_frame.rotation();
  const Point3& c = needle_frame.translation();
  NeedlePose pose;
  pose.circle = Circle3D{c, UnitVector3::normalized(r.col(2)), needle_spec.radius};
  pose.swage = c + needle_spec.radius * r.col(0);
  pose.tip = c + needle_spec.radius * (std::cos(needle_spec.arc_span) * r.col(0) + std::sin(needle_spec.arc_span) * r.col(1));
  return pose;
}

SimWorld::SimWorld(const SimConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  state_.needle_spec = config_.needle;
  state_.wound = config_.wound;
  state_.thread.total_length = config_.thread_length;
  state_.rng = make_rng(seed, kWorldStream);
  state_.intervention_budget = config_.failures.intervention_budget;
  state_.grippers[0].id = GripperId::left;
  state_.grippers[1].id = GripperId::right;
  reset_to_home();
}

NeedlePose SimWorld::nominal_needle_pose() const {
  Mat3 r;
  r.col(0) = Vec3::UnitX();
  r.col(1) = -Vec3::UnitZ();
  r.col(2) = Vec3::UnitY();
  WorldState probe;
  probe.needle_spec = config_.needle;
  probe.needle_frame = RigidTransform(r, config_.workspace.needle_home);
  return probe.needle_true();
}

void SimWorld::reset_to_home() {
  const auto& ws = config_.workspace;
  state_.needle_frame = needle_frame(nominal_needle_pose());
  const double a = ws.canonical_grasp_angle;
  const Point3 grasp = state_.needle_frame.apply(Point3(config_.needle.radius * std::cos(a), config_.needle.radius * std::sin(a), 0.0));

  // Jaws straddle the needle plane with the grasp point at mid-jaw.
  Mat3 tool;
  tool.col(0) = Vec3::UnitY();
  tool.col(1) = Vec3::UnitZ();
  tool.col(2) = Vec3::UnitX();
  const RigidTransform right_pose(tool, grasp + 0.5 * ws.jaw_length * tool.col(0));

  auto& left = state_.gripper(GripperId::left);
  left.pose = RigidTransform::translation(ws.left_home);
  left.jaw = Jaw::open;
  left.holding = std::monostate{};

  auto& right = state_.gripper(GripperId::right);
  right.pose = right_pose;
  right.jaw = Jaw::closed;
  right.holding = NeedleHold{grasp, a, right_pose.inverse() * state_.needle_frame};

  state_.needle_in_tissue = false;
  state_.needle_dropped = false;
  state_.dual_grasp_window = false;
  state_.entangled = false;
}

void SimWorld::advance(double seconds) {
  if (seconds < 0.0) throw std::logic_error("clock cannot run backwards");
  state_.clock += seconds;
}

void SimWorld::set_suture_index(int i) {
  if (i < 1 || i > state_.wound.n_target_sutures + 1) throw std::out_of_range("suture index out of range");
  state_.suture_index = i;
}

double SimWorld::distance_to_arc(const Point3& p, double* arc_angle) const {
  const Mat3& r = state_.needle_frame.rotation();
  const Vec3 q = r.transpose() * (p - state_.needle_frame.translation());
  const double radius = state_.needle_spec.radius;
  const double span = state_.needle_spec.arc_span;
  double theta = std::atan2(q.y(), q.x());
  if (theta < 0.0) theta += 2.0 * kPi;
  const double rho = std::hypot(q.x(), q.y());
  if (theta <= span) {
    if (arc_angle) *arc_angle = theta;
    return std::hypot(q.z(), rho - radius);
  }
  const Vec3 start(radius, 0.0, 0.0);
  const Vec3 end(radius * std::cos(span), radius * std::sin(span), 0.0);
  const double ds = (q - start).norm();
  const double de = (q - end).norm();
  if (arc_angle) *arc_angle = ds <= de ? 0.0 : span;
  return std::min(ds, de);
}

std::pair<double, double> SimWorld::jaw_to_needle(const GripperState& g) const {
  const Point3 tip = g.pose.translation();
  const Point3 heel = tip - config_.workspace.jaw_length * g.pose.rotation().col(0);
  const NeedlePose pose = state_.needle_true();
  const double span = state_.needle_spec.arc_span;
  auto dist = [&](double t) { return segment_distance(needle_arc_point(pose, t), heel, tip); };

  int best = 0;
  double best_d = dist(0.0);
  for (int k = 1; k <= kArcSamples; ++k) {
    const double d = dist(span * k / kArcSamples);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  // Golden-section polish inside the bracketing samples.
  double lo = span * std::max(0, best - 1) / kArcSamples;
  double hi = span * std::min(kArcSamples, best + 1) / kArcSamples;
  const double g_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double a = hi - g_ratio * (hi - lo);
    const double b = lo + g_ratio * (hi - lo);
    if (dist(a) < dist(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double d = dist(t);
  if (d < best_d) return {d, t};
  return {best_d, span * best / kArcSamples};
}

double SimWorld::grasp_success_probability(double d) const {
  const auto& f = config_.failures;
  const double miss = f.grasp_miss_base + f.grasp_miss_per_mm_pose_error * (d * 1000.0);
  return std::clamp(1.0 - miss, 0.0, 1.0);
}

std::vector<ArcInterval> SimWorld::hidden_arcs() const {
  std::vector<ArcInterval> out;
  const NeedlePose pose = state_.needle_true();
  const double span = state_.needle_spec.arc_span;
  const double surface = config_.workspace.tissue_surface_z;
  int run_start = -1;
  for (int k = 0; k <= kArcSamples; ++k) {
    const double t = span * k / kArcSamples;
    const bool buried = needle_arc_point(pose, t).z() < surface;
    if (buried && run_start < 0) run_start = k;
    if ((!buried || k == kArcSamples) && run_start >= 0) {
      const int last = buried ? k : k - 1;
      out.push_back({span * run_start / kArcSamples, span * last / kArcSamples});
      run_start = -1;
    }
  }
  const double w = config_.perception.jaw_occlusion_half_arc;
  for (const auto& g : state_.grippers) {
    if (const auto* hold = std::get_if<NeedleHold>(&g.holding); hold && w > 0.0) {
      out.push_back({hold->arc_angle - w, hold->arc_angle + w});
    }
  }
  return out;
}

NeedlePose SimWorld::observe() {
  advance(config_.timing.perception_period);
  const auto& pm = config_.perception;
  const NeedleSpec& spec = state_.needle_spec;
  const NeedlePose truth = state_.needle_true();

  auto hidden = hidden_arcs();
  std::sort(hidden.begin(), hidden.end(), [](const ArcInterval& a, const ArcInterval& b) { return a.begin < b.begin; });
  double visible = 0.0;
  double cursor = 0.0;
  for (const auto& h : hidden) {
    const double b = std::clamp(h.begin, 0.0, spec.arc_span);
    if (b > cursor) visible += b - cursor;
    cursor = std::max(cursor, std::clamp(h.end, 0.0, spec.arc_span));
  }
  if (cursor < spec.arc_span) visible += spec.arc_span - cursor;

  // Draw every random quantity up front so the stream advances identically
  // whether or not the estimate succeeds.
  const std::uint64_t cloud_seed = state_.rng();
  const std::uint64_t fit_seed = state_.rng();
  const bool in_view = (truth.circle.center - pm.view_corner).norm() <= pm.view_radius;
  const double corrupt_p =
      std::min(1.0, config_.failures.perception_corruption_prob * (in_view ? pm.corner_corruption_scale : 1.0));
  const bool corrupt = bernoulli(state_.rng, corrupt_p);
  Vec3 axis = Vec3::UnitZ();
  Vec3 shift = Vec3::Zero();
  double angle = 0.0;
  if (corrupt) {
    axis = random_unit(state_.rng);
    angle = deg_to_rad(std::uniform_real_distribution<double>(pm.corruption_min_deg, pm.corruption_max_deg)(state_.rng));
    shift = random_unit(state_.rng) *
            std::uniform_real_distribution<double>(pm.corruption_min_shift, pm.corruption_max_shift)(state_.rng);
  }

  if (visible < pm.min_visible_arc || visible <= 0.0) throw PerceptionError("needle not visible");

  NoiseModel noise = pm.noise;
  noise.occlusion_arc = 0.0;
  if (!in_view) noise.gaussian_sigma *= pm.off_corner_noise_scale;
  const PointCloud cloud = synth_needle_cloud(truth, spec, noise, pm.n_points, cloud_seed, hidden);

  EstimatorParams params = pm.estimator;
  params.plane.seed = fit_seed;
  params.circle.seed = fit_seed + 1;
  NeedlePose est;
  try {
    est = estimate_needle_pose(cloud, spec, params).pose;
  } catch (const EstimationError& e) {
    throw PerceptionError(e.what());
  }
  if (corrupt) {
    const RigidTransform t =
        RigidTransform::translation(shift) * rotation_about_point(UnitVector3(axis), angle, est.circle.center);
    est.circle = t.apply(est.circle);
    est.tip = t.apply(est.tip);
    est.swage = t.apply(est.swage);
  }
  return est;
}

void SimWorld::execute(GripperId id, const Motion& motion) {
  GripperState& g = state_.gripper(id);
  const GripperState& o = state_.gripper(other(id));

  if (const auto* jaw = std::get_if<SetJaw>(&motion)) {
    last_grasp_ = {};
    if (jaw->jaw == Jaw::closed && g.jaw == Jaw::open) {
      g.jaw = Jaw::closed;
      g.holding = std::monostate{};
      if (!state_.needle_dropped) {
        const auto [d, arc] = jaw_to_needle(g);
        last_grasp_.distance = d;
        if (d <= config_.workspace.grasp_capture_radius) {
          last_grasp_.attempted = true;
          last_grasp_.success_probability = grasp_success_probability(d);
          last_grasp_.success = bernoulli(state_.rng, last_grasp_.success_probability);
        }
        if (last_grasp_.success) {
          if (o.holds_needle()) {
            if (!state_.dual_grasp_window) throw std::logic_error("second grasp on the needle outside the handover window");
            const double twist = deg_to_rad(config_.workspace.handover_twist_deg_per_mm * d * 1000.0);
            if (twist > 0.0) {
              const Point3 at = needle_arc_point(state_.needle_true(), arc);
              const RigidTransform r = rotation_about_point(UnitVector3::normalized(g.pose.rotation().col(0)), twist, at);
              state_.needle_frame = r * state_.needle_frame;
              auto& other_hold = std::get<NeedleHold>(state_.gripper(other(id)).holding);
              other_hold.needle_in_tool = o.pose.inverse() * state_.needle_frame;
            }
          }
          const Point3 at = needle_arc_point(state_.needle_true(), arc);
          g.holding = NeedleHold{at, arc, g.pose.inverse() * state_.needle_frame};
        }
      }
    } else if (jaw->jaw == Jaw::open && g.jaw == Jaw::closed) {
      g.jaw = Jaw::open;
      if (g.holds_needle() && !o.holds_needle() && !state_.needle_in_tissue) state_.needle_dropped = true;
      g.holding = std::monostate{};
    }
    advance(config_.timing.duration("jaw"));
    check_invariants();
    return;
  }

  RigidTransform next;
  if (const auto* mv = std::get_if<MoveTo>(&motion)) {
    next = mv->target;
  } else {
    next = motion_transform(g.pose, motion) * g.pose;
  }
  if (!config_.workspace.contains(next.translation())) {
    throw MotionError(std::string(motion_name(motion)) + " takes the " + to_string(id) + " gripper out of the workspace");
  }
  if (g.holds_needle() && o.holds_needle()) {
    throw MotionError("cannot move the " + std::string(to_string(id)) + " gripper while both grippers hold the needle");
  }
  const RigidTransform delta = motion_transform(g.pose, motion);
  g.pose = next;
  if (auto* hold = std::get_if<NeedleHold>(&g.holding)) {
    state_.needle_frame = g.pose * hold->needle_in_tool;
    hold->grasp_point = delta.apply(hold->grasp_point);
    refresh_tissue_state();
  }
  advance(config_.timing.duration(motion_name(motion)));
  check_invariants();
}

void SimWorld::refresh_tissue_state() {
  if (!state_.needle_in_tissue) return;
  const NeedlePose pose = state_.needle_true();
  const double surface = config_.workspace.tissue_surface_z;
  for (int k = 0; k <= kArcSamples; ++k) {
    if (needle_arc_point(pose, state_.needle_spec.arc_span * k / kArcSamples).z() < surface) return;
  }
  state_.needle_in_tissue = false;
}

InsertionResult SimWorld::tissue_pass_check(const Point3& entry, const Point3& exit) {
  const double tol = config_.workspace.insertion_tolerance;
  double t_entry = 0.0;
  double t_exit = 0.0;
  if (distance_to_arc(entry, &t_entry) > tol) return InsertionResult::missed_wound;
  if (distance_to_arc(exit, &t_exit) > tol) return InsertionResult::bad_exit;
  // The tip leads, so the entry sits further back along the body than the exit,
  // and the stretch between them has to run under the surface.
  if (!(t_entry < t_exit)) return InsertionResult::missed_wound;
  const Point3 mid = needle_arc_point(state_.needle_true(), 0.5 * (t_entry + t_exit));
  if (!(mid.z() < config_.workspace.tissue_surface_z)) return InsertionResult::missed_wound;
  if (bernoulli(state_.rng, config_.failures.insertion_slip_prob)) return InsertionResult::slipped;
  state_.needle_in_tissue = true;
  return InsertionResult::ok;
}

EntanglementResult SimWorld::thread_entanglement_check(bool swept) {
  const auto& f = config_.failures;
  const bool tangled = bernoulli(state_.rng, swept ? f.entanglement_prob_swept : f.entanglement_prob_unswept);
  if (tangled) state_.entangled = true;
  return tangled ? EntanglementResult::entangled : EntanglementResult::clear;
}

void SimWorld::pull_thread(double length) {
  if (!(length >= 0.0) || !std::isfinite(length)) throw std::invalid_argument("pull length must be >= 0");
  if (length == 0.0) return;
  auto& t = state_.thread;
  if (t.pulled_through + length > t.total_length) {
    throw ThreadError("out of thread: " + std::to_string(t.total_length - t.pulled_through) + " m left, " +
                      std::to_string(length) + " m requested");
  }
  t.pulled_through += length;
  const auto i = static_cast<std::size_t>(state_.suture_index);
  if (t.per_suture_used.size() < i) t.per_suture_used.resize(i, 0.0);
  t.per_suture_used[i - 1] += length;
  advance(config_.timing.duration("pull_thread"));
}

void SimWorld::human_intervention() {
  if (state_.intervention_budget <= 0) throw BudgetExhausted("intervention budget exhausted");
  --state_.intervention_budget;
  state_.intervention_sutures.push_back(state_.suture_index);
  reset_to_home();
  advance(config_.timing.duration("intervention"));
}

bool SimWorld::grasp_feedback(GripperId id) const {
  const auto& g = state_.gripper(id);
  return g.jaw == Jaw::closed && !std::holds_alternative<std::monostate>(g.holding);
}

void SimWorld::set_dual_grasp_window(bool open) {
  state_.dual_grasp_window = open;
  check_invariants();
}

void SimWorld::check_invariants() const {
  if (!state_.dual_grasp_window && state_.grippers[0].holds_needle() && state_.grippers[1].holds_needle()) {
    throw std::logic_error("both grippers hold the needle outside the handover window");
  }
}

}  // namespace stitch
