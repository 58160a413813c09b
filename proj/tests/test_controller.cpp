#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stitch/controller.hpp"
#include "scripted_world.hpp"
#include "trace_checks.hpp"

using namespace stitch;

using stitch_test::count_events;
using stitch_test::quiet_config;
using stitch_test::ScriptedWorld;

namespace {

void expect_trace_ok(const EventTrace& t, const Stages& stages, const ControllerParams& params) {
  const auto report = trace_check::all(t, stages, params);
  EXPECT_TRUE(report.ok()) << report.text();
}

}  // namespace

TEST(PlanInsertion, DirectionAndRotation) {
  SimWorld w(quiet_config(), 1);
  const ControllerParams params;
  const auto plan = plan_insertion(w.nominal_needle_pose(), w.gripper(GripperId::right).pose, Point3(0, 0, 0),
                                   Point3(0.01, 0, 0), params);
  EXPECT_LT((plan.direction - Vec3(1, 0, 0)).norm(), 1e-15);
  ASSERT_EQ(plan.script.size(), 3u);
  const auto& rot = std::get<RotateHeld>(plan.script[2]);
  EXPECT_EQ(rot.angle, deg_to_rad(45.0));
  EXPECT_EQ(params.insertion_rotation, deg_to_rad(45.0));
}

TEST(PlanInsertion, ScriptDrivesTipThroughTheWound) {
  SimWorld w(quiet_config(), 2);
  const ControllerParams params;
  const Point3 entry = w.wound().entry_points[0];
  const Point3 exit = w.wound().exit_points[0];
  const auto plan = plan_insertion(w.nominal_needle_pose(), w.gripper(GripperId::right).pose, entry, exit, params);

  w.execute(GripperId::right, plan.script[0]);
  w.execute(GripperId::right, plan.script[1]);
  EXPECT_LT((w.state().needle_true().tip - exit).norm(), 1e-12);
  EXPECT_EQ(w.tissue_pass_check(entry, exit), InsertionResult::ok);
  w.execute(GripperId::right, plan.script[2]);

  const NeedlePose after = w.state().needle_true();
  const Vec3 dir = (exit - entry).normalized();
  EXPECT_GT((after.tip - entry).dot(dir), (exit - entry).norm());
  EXPECT_GT(after.tip.z(), 0.0);
  EXPECT_LT((after.tip - plan.target.tip).norm(), 1e-12);
  EXPECT_TRUE(w.state().needle_in_tissue);
}

TEST(PlanInsertion, RejectsImpossibleBites) {
  const ControllerParams params;
  SimWorld w(quiet_config(), 3);
  const auto needle = w.nominal_needle_pose();
  const auto g = w.gripper(GripperId::right).pose;
  EXPECT_THROW(plan_insertion(needle, g, Point3(0, 0, 0), Point3(0, 0, 0), params), PlanError);
  EXPECT_THROW(plan_insertion(needle, g, Point3(0, 0, 0), Point3(0.03, 0, 0), params), PlanError);
}

TEST(Sweep, FollowsWoundAxisAndFlagsExtraction) {
  ScriptedWorld w(quiet_config(), 4);
  Controller c(ControllerParams{}, Stages{}, 4);
  c.sweep_thread(w);
  bool along_axis = false;
  for (const auto& [id, m] : w.motions) {
    if (const auto* t = std::get_if<Translate>(&m); t && t->offset.norm() > 0.04) {
      along_axis = (t->offset.normalized() - w.wound().wound_axis.vec()).norm() < 1e-12;
    }
  }
  EXPECT_TRUE(along_axis);
}

TEST(Sweep, EntanglementCheckSeesTheSweep) {
  for (bool sweep : {true, false}) {
    ScriptedWorld w(quiet_config(), 5);
    Stages stages;
    stages.sweep = sweep;
    Controller c(ControllerParams{}, stages, 5);
    const auto out = c.run_suture(w, 1);
    ASSERT_EQ(out.state_after, PipelineState::Done);
    ASSERT_EQ(w.swept_flags.size(), 1u);
    EXPECT_EQ(w.swept_flags[0], sweep);
  }
}

TEST(PlanExtraction, NearerEndpointAndOffsets) {
  const ControllerParams params;
  NeedlePose pose = make_needle_pose(Point3(0, 0, 0.005), UnitVector3::unit_y(), Vec3(1, 0, 0), NeedleSpec{});
  const RigidTransform left = RigidTransform::translation(Vec3(-0.06, 0.0, 0.06));
  const auto plan = plan_extraction(pose, left, params, 0.0);
  const Point3 a = (pose.tip - left.translation()).norm() < (pose.swage - left.translation()).norm() ? pose.tip : pose.swage;
  EXPECT_EQ(plan.regrasp, a);
  const Vec3 start = plan.approach_pose.translation();
  EXPECT_NEAR((a - start).norm(), 0.01, 1e-15);
  EXPECT_NEAR((a - start).z(), 0.0, 1e-15);
  const Point3 end = start + std::get<Translate>(plan.grasp[2]).offset;
  EXPECT_NEAR((end - a).norm(), 0.005, 1e-15);
  EXPECT_NEAR((end - a).dot(plan.approach_direction), 0.005, 1e-15);
  EXPECT_EQ(std::get<RotateHeld>(plan.withdraw[0]).angle, deg_to_rad(80.0));
}

TEST(PlanExtraction, NoExposedEndpoint) {
  NeedlePose pose = make_needle_pose(Point3(0, 0, -0.05), UnitVector3::unit_y(), Vec3(1, 0, 0), NeedleSpec{});
  EXPECT_THROW(plan_extraction(pose, RigidTransform{}, ControllerParams{}, 0.0), ExtractionPlanError);
}

TEST(Cinch, Formula) {
  EXPECT_EQ(cinch_length(1, 0.10, 0.015), 0.10);
  EXPECT_DOUBLE_EQ(cinch_length(3, 0.20, 0.03), 0.14);
  EXPECT_THROW(cinch_length(5, 0.10, 0.03), CinchError);
  EXPECT_THROW(cinch_length(0, 0.10, 0.03), std::invalid_argument);
}

TEST(Handover, JitterRange) {
  Rng rng = make_rng(9);
  for (int k = 0; k < 100000; ++k) {
    const double j = draw_handover_jitter(rng, 0.005);
    ASSERT_GE(j, 0.0);
    ASSERT_LT(j, 0.005);
  }
}

TEST(Handover, RegraspsFarEndpoint) {
  const ControllerParams params;
  const NeedlePose pose = make_needle_pose(Point3(0, 0, 0.05), UnitVector3::unit_y(), Vec3(1, 0, 0), NeedleSpec{});
  const RigidTransform left = RigidTransform::translation(Vec3(-0.02, 0.0, 0.05));
  const RigidTransform right = RigidTransform::translation(Vec3(0.06, 0.0, 0.06));
  const auto plan = plan_handover(pose, left, right, params, 0.0);
  EXPECT_EQ(plan.regrasp, pose.swage);
  EXPECT_NEAR((plan.regrasp - plan.approach_pose.translation()).norm(), 0.01, 1e-15);
  const auto shifted = plan_handover(pose, left, right, params, 0.003);
  EXPECT_NEAR((shifted.approach_pose.translation() - plan.approach_pose.translation()).norm(), 0.003, 1e-15);
  EXPECT_NEAR((shifted.approach_pose.translation() - plan.approach_pose.translation()).z(), 0.0, 1e-15);
}

TEST(Recovery, ExtractionThreshold) {
  const ControllerParams params;
  const NeedlePose a = make_needle_pose(Point3(0, 0, 0), UnitVector3::unit_y(), Vec3(1, 0, 0), NeedleSpec{});
  const NeedlePose near = transform_pose(RigidTransform::translation(Vec3(0.015, 0, 0)), a);
  const NeedlePose far = transform_pose(RigidTransform::translation(Vec3(0.05, 0, 0)), a);
  EXPECT_EQ(recover_extraction(a, near, params, 0), Recovery::retry);
  EXPECT_EQ(recover_extraction(a, far, params, 0), Recovery::proceed);
  EXPECT_EQ(recover_extraction(a, near, params, 4), Recovery::retry);
  EXPECT_EQ(recover_extraction(a, near, params, 5), Recovery::fail);
  const NeedlePose edge = transform_pose(RigidTransform::translation(Vec3(0.02, 0, 0)), a);
  EXPECT_EQ(recover_extraction(a, edge, params, 0), Recovery::proceed);
}

TEST(Recovery, HandoverNormalChange) {
  ControllerParams params;
  const UnitVector3 n = UnitVector3::unit_y();
  EXPECT_EQ(recover_handover(n, n, params), Recovery::proceed);
  EXPECT_EQ(recover_handover(n, -n, params), Recovery::proceed);
  const UnitVector3 five = rotation_about_axis(UnitVector3::unit_x(), deg_to_rad(5.0)).apply(n);
  EXPECT_EQ(recover_handover(n, five, params), Recovery::retry);
  const UnitVector3 small = rotation_about_axis(UnitVector3::unit_x(), deg_to_rad(0.5)).apply(n);
  params.handover_normal_epsilon = axial_angle_between(n.vec(), small.vec());
  EXPECT_EQ(recover_handover(n, small, params), Recovery::proceed);
  params.handover_normal_epsilon = std::nextafter(params.handover_normal_epsilon, 0.0);
  EXPECT_EQ(recover_handover(n, small, params), Recovery::retry);
}

TEST(Perception, LabelingRecoversPhysicalPose) {
  const NeedleSpec spec;
  const NeedlePose truth = make_needle_pose(Point3(0.01, 0, 0.03), UnitVector3::normalized(Vec3(0.2, 1, 0.1)),
                                            Vec3(1, 0, 0), spec);
  NeedlePose raw = truth;
  raw.circle.normal = -truth.circle.normal;
  std::swap(raw.tip, raw.swage);
  const NeedlePose predicted = transform_pose(RigidTransform::translation(Vec3(0.002, 0.001, 0)), truth);
  const NeedlePose labeled = label_observation(raw, predicted, spec);
  EXPECT_LT((labeled.tip - truth.tip).norm(), 1e-12);
  EXPECT_LT((labeled.swage - truth.swage).norm(), 1e-12);
  EXPECT_LT((labeled.circle.normal.vec() - truth.circle.normal.vec()).norm(), 1e-12);
}

TEST(Perception, AggregateNormalsSignAligns) {
  const std::vector<UnitVector3> ns{UnitVector3::unit_y(), -UnitVector3::unit_y(), UnitVector3::unit_y()};
  EXPECT_LT((aggregate_normals(ns).vec() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_THROW(aggregate_normals({}), std::invalid_argument);
}

TEST(PoseCorrection, NormalAlreadyAlignedNeedsNoFirstRotation) {
  ScriptedWorld w(quiet_config(), 6);
  Controller c(ControllerParams{}, Stages{}, 6);
  c.set_belief(w.nominal_needle_pose(), GripperId::right);
  c.pose_correction(w);
  int rotations = 0;
  for (const auto& [id, m] : w.motions) rotations += std::holds_alternative<RotateHeld>(m) ? 1 : 0;
  EXPECT_EQ(rotations, 1);
  EXPECT_LT(axial_angle_between(w.sim.state().needle_true().circle.normal.vec(), Vec3::UnitY()), 1e-9);
}

TEST(PoseCorrection, AlignsNormalWithY) {
  ScriptedWorld w(quiet_config(), 7);
  const Point3 center = w.sim.state().needle_true().circle.center;
  w.sim.execute(GripperId::right, RotateHeld{UnitVector3::unit_z(), kPi / 2, center});
  ASSERT_LT(axial_angle_between(w.sim.state().needle_true().circle.normal.vec(), Vec3::UnitX()), 1e-12);
  Controller c(ControllerParams{}, Stages{}, 7);
  c.set_belief(w.sim.state().needle_true(), GripperId::right);
  c.pose_correction(w);
  EXPECT_EQ(count_events(c.events(), EventType::observation, PipelineState::PoseCorrection), 10);
  EXPECT_LT(axial_angle_between(w.sim.state().needle_true().circle.normal.vec(), Vec3::UnitY()), 1e-6);
  EXPECT_LT((c.belief()->tip - w.sim.state().needle_true().tip).norm(), 1e-9);
}

TEST(PoseCorrection, AggregationUnderAngularNoise) {
  // Ten normals each tilted by up to 2 degrees; the aligned result lands within 1 degree of +y.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> tilt(0.0, deg_to_rad(2.0));
  int good = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const Vec3 truth = Vec3(g(rng), g(rng), g(rng)).normalized();
    std::vector<UnitVector3> samples;
    for (int k = 0; k < 10; ++k) {
      Vec3 axis(g(rng), g(rng), g(rng));
      axis -= axis.dot(truth) * truth;
      Vec3 n = rotation_about_axis(UnitVector3::normalized(axis), tilt(rng)).apply_vector(truth);
      if (k % 3 == 1) n = -n;
      samples.push_back(UnitVector3::normalized(n));
    }
    const UnitVector3 mean = aggregate_normals(samples);
    const Vec3 corrected = align_vectors(mean, UnitVector3::unit_y()).apply_vector(truth);
    good += rad_to_deg(axial_angle_between(corrected, Vec3::UnitY())) <= 1.0 ? 1 : 0;
  }
  EXPECT_GE(good, 475);
}

TEST(RunSuture, NominalPathIsClean) {
  ScriptedWorld w(quiet_config(), 10);
  const ControllerParams params;
  Controller c(params, Stages{}, 10);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Done);
  EXPECT_EQ(out.retries_used, 0);
  EXPECT_FALSE(out.error);
  EXPECT_DOUBLE_EQ(w.thread().pulled_through, cinch_length(1, params.l_des, params.l_each));
  EXPECT_FALSE(w.gripper(GripperId::left).holds_needle());
  EXPECT_TRUE(w.gripper(GripperId::right).holds_needle());
  expect_trace_ok(out.events, Stages{}, params);
}

TEST(RunSuture, SixSuturesInARow) {
  ScriptedWorld w(quiet_config(), 11);
  const ControllerParams params;
  Controller c(params, Stages{}, 11);
  EventTrace all;
  for (int i = 1; i <= 6; ++i) {
    const auto out = c.run_suture(w, i);
    ASSERT_EQ(out.state_after, PipelineState::Done) << "suture " << i;
    all.insert(all.end(), out.events.begin(), out.events.end());
  }
  expect_trace_ok(all, Stages{}, params);
  EXPECT_NEAR(w.thread().pulled_through, 6 * 0.10 - 15 * 0.015, 1e-12);
}

TEST(RunSuture, EntanglementIsThreadError) {
  ScriptedWorld w(quiet_config(), 12);
  w.force_entangle = true;
  Controller c(ControllerParams{}, Stages{}, 12);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Failed);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(*out.error, ErrorKind::T);
  expect_trace_ok(out.events, Stages{}, ControllerParams{});
}

TEST(RunSuture, HandoverFailsAfterExactlyFiveRetries) {
  ScriptedWorld w(quiet_config(), 13);
  w.handover_misses = 6;
  const ControllerParams params;
  Controller c(params, Stages{}, 13);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Failed);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(*out.error, ErrorKind::H);
  EXPECT_EQ(count_events(out.events, EventType::retry, PipelineState::Handover), 5);
  EXPECT_EQ(count_events(out.events, EventType::grasp, PipelineState::Handover), 6);
  EXPECT_EQ(out.retries_used, 5);
  expect_trace_ok(out.events, Stages{}, params);
}

TEST(RunSuture, HandoverRecoversWithinRetries) {
  ScriptedWorld w(quiet_config(), 14);
  w.handover_misses = 5;
  const ControllerParams params;
  Controller c(params, Stages{}, 14);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Done);
  EXPECT_EQ(count_events(out.events, EventType::retry, PipelineState::Handover), 5);
  expect_trace_ok(out.events, Stages{}, params);
}

TEST(RunSuture, ExtractionFailsAfterExactlyFiveRetries) {
  ScriptedWorld w(quiet_config(), 15);
  w.freeze_after_left_grasp();
  const ControllerParams params;
  Controller c(params, Stages{}, 15);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Failed);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(*out.error, ErrorKind::E);
  EXPECT_EQ(count_events(out.events, EventType::retry, PipelineState::Extraction), 5);
  for (const auto& e : out.events) {
    if (e.type == EventType::retry) EXPECT_LT(e.progress, params.extraction_progress_threshold);
  }
  expect_trace_ok(out.events, Stages{}, params);
}

TEST(RunSuture, HumanModeInterventionRecovers) {
  SimConfig cfg = quiet_config();
  cfg.failures.intervention_budget = 2;
  ScriptedWorld w(cfg, 16);
  w.handover_misses = 6;
  Stages stages;
  stages.human_mode = true;
  const ControllerParams params;
  Controller c(params, stages, 16);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Done);
  EXPECT_EQ(count_events(out.events, EventType::intervention, PipelineState::Failed), 1);
  EXPECT_EQ(count_events(out.events, EventType::attempt_start, PipelineState::Insertion), 2);
  EXPECT_EQ(w.intervention_budget(), 1);
  expect_trace_ok(out.events, stages, params);
}

TEST(RunSuture, HumanModeStopsWhenBudgetIsSpent) {
  SimConfig cfg = quiet_config();
  cfg.failures.intervention_budget = 2;
  ScriptedWorld w(cfg, 17);
  w.force_entangle = true;
  Stages stages;
  stages.human_mode = true;
  Controller c(ControllerParams{}, stages, 17);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Failed);
  EXPECT_EQ(count_events(out.events, EventType::intervention, PipelineState::Failed), 2);
  EXPECT_EQ(count_events(out.events, EventType::error, PipelineState::Extraction), 3);
  EXPECT_EQ(w.intervention_budget(), 0);
  expect_trace_ok(out.events, stages, ControllerParams{});
}

TEST(RunSuture, SkippedStagesFollowTheReducedGraph) {
  Stages sensing;
  sensing.sweep = false;
  sensing.cinch = false;
  sensing.pose_correction = false;
  ScriptedWorld w(quiet_config(), 18);
  Controller c(ControllerParams{}, sensing, 18);
  const auto out = c.run_suture(w, 1);
  EXPECT_EQ(out.state_after, PipelineState::Done);
  EXPECT_EQ(w.thread().pulled_through, 0.0);
  expect_trace_ok(out.events, sensing, ControllerParams{});
  // The full graph rejects this trace: Insertion may not skip Sweep there.
  EXPECT_FALSE(trace_check::state_graph(out.events, Stages{}).ok());
}

TEST(TraceChecks, DetectViolations) {
  EventTrace t;
  Event start;
  start.type = EventType::attempt_start;
  t.push_back(start);
  Event jump;
  jump.type = EventType::transition;
  jump.state = PipelineState::Insertion;
  jump.to = PipelineState::Handover;
  t.push_back(jump);
  EXPECT_FALSE(trace_check::state_graph(t, Stages{}).ok());

  Event grasp;
  grasp.type = EventType::grasp;
  grasp.state = PipelineState::Insertion;
  EXPECT_FALSE(trace_check::perception_gating({start, grasp}).ok());

  EventTrace retries{start};
  for (int k = 1; k <= 6; ++k) {
    Event r;
    r.type = EventType::retry;
    r.state = PipelineState::Handover;
    r.to = PipelineState::Handover;
    r.retries = k;
    retries.push_back(r);
  }
  EXPECT_FALSE(trace_check::retry_bounds(retries, 5).ok());
  retries.pop_back();
  EXPECT_TRUE(trace_check::retry_bounds(retries, 5).ok());
}
