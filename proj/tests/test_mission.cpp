#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "minenav/metrics.hpp"
#include "minenav/mission.hpp"
#include "minenav/records_io.hpp"
#include "test_util.hpp"

namespace minenav {
namespace {

struct Corridor {
  MissionContext context;
  double cy = 0.0;
};

const Corridor& SharedCorridor() {
  static const Corridor c = [] {
    Corridor out;
    const WorldSpec spec = testing::StraightCorridorSpec(20.0, 3.0, 0.1);
    const MissionParams params;
    WorldMap world = GenerateWorld(spec);
    PointCloud map =
        BuildPriorMap(world, SurveyPoses(spec), params.lidar, params.limits);
    out.cy = world.height_m() / 2.0;
    out.context = MakeMissionContext(std::move(world), std::move(map), params);
    return out;
  }();
  return c;
}

MissionConfig CorridorConfig(double start_x, double goal_x,
                             std::uint64_t seed = 1) {
  MissionConfig cfg;
  cfg.goal_name = "smoke";
  cfg.initial_pose = Pose2(start_x, SharedCorridor().cy, 0.0);
  cfg.goal_pose = Pose2(goal_x, SharedCorridor().cy, 0.0);
  cfg.seed = seed;
  cfg.params.timeout_s = 120.0;
  return cfg;
}

TEST(Mission, ParamsValidate) {
  MissionParams p;
  EXPECT_EQ(p.TicksPerScan(), 10);
  EXPECT_EQ(p.ScansPerPlan(), 4);
  EXPECT_DOUBLE_EQ(p.pmf.support_z, -p.limits.sensor_height);
  p.success_radius = 0.2;  // below the controller tolerance
  EXPECT_THROW(p.Validate(), std::exception);
}

TEST(Mission, SmokeTwoMetresAhead) {
  const TrialRecord r = RunTrial(SharedCorridor().context, CorridorConfig(6.0, 8.0));
  EXPECT_TRUE(r.success) << r.failure;
  EXPECT_FALSE(r.contact);
  EXPECT_NEAR(r.geodesic, 2.0, 0.05);
  EXPECT_LT(r.path_length / r.geodesic, 1.2);
  EXPECT_LE(r.final_distance, 1.0);
  EXPECT_GT(r.path_length, 0.0);
}

TEST(Mission, RateFidelityAndTracing) {
  const TrialRecord r = RunTrial(SharedCorridor().context, CorridorConfig(4.0, 18.0));
  ASSERT_TRUE(r.success) << r.failure;
  ASSERT_FALSE(r.traces.empty());
  std::set<std::uint64_t> scans;
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const LatencyTrace& t = r.traces[i];
    // Plans run on every fourth scan: exactly 2.5 Hz in virtual time.
    EXPECT_EQ(t.scan_index, 4 * i);
    EXPECT_NEAR(t.scan_stamp, 0.4 * i, 1e-9);
    EXPECT_TRUE(scans.insert(t.scan_index).second);
    ASSERT_EQ(t.stages.size(), CriticalStages().size());
    double prev = t.scan_stamp;
    for (std::size_t s = 0; s < t.stages.size(); ++s) {
      EXPECT_EQ(t.stages[s].stage, CriticalStages()[s]);
      EXPECT_NEAR(t.stages[s].enter, prev, 1e-12);
      EXPECT_GE(t.stages[s].exit, t.stages[s].enter);
      prev = t.stages[s].exit;
    }
    EXPECT_NEAR(t.command_stamp, prev, 1e-12);
  }
  // Trajectory samples every scan: exactly 10 Hz.
  for (std::size_t i = 0; i + 1 < r.trajectory.size(); ++i) {
    EXPECT_NEAR(r.trajectory[i].t, 0.1 * i, 1e-9);
  }
  // Localization is a separate branch and never appears on the critical path.
  EXPECT_FALSE(r.localization_samples.empty());
  for (const LocalizationSample& s : r.localization_samples) {
    EXPECT_GT(s.done_stamp, s.scan_stamp);
  }
}

TEST(Mission, UnreachableGoal) {
  WorldSpec spec;
  spec.width_m = 30.0;
  spec.height_m = 8.0;
  CorridorSegment a;
  a.polyline = {{3.0, 4.0}, {12.0, 4.0}};
  CorridorSegment b;
  b.polyline = {{15.0, 4.0}, {27.0, 4.0}};
  spec.segments = {a, b};
  const MissionParams params;
  WorldMap world = GenerateWorld(spec);
  PointCloud map = BuildPriorMap(world, SurveyPoses(spec), params.lidar, params.limits);
  const MissionContext ctx = MakeMissionContext(std::move(world), std::move(map), params);
  MissionConfig cfg;
  cfg.goal_name = "walled";
  cfg.initial_pose = Pose2(5.0, 4.0, 0.0);
  cfg.goal_pose = Pose2(20.0, 4.0, 0.0);
  cfg.params.timeout_s = 60.0;
  const TrialRecord r = RunTrial(ctx, cfg);
  EXPECT_FALSE(r.success);
  EXPECT_NE(r.failure.find("unreachable"), std::string::npos) << r.failure;
}

TEST(Mission, TimeoutRecordsFailure) {
  MissionConfig cfg = CorridorConfig(4.0, 18.0);
  cfg.params.timeout_s = 5.0;
  const TrialRecord r = RunTrial(SharedCorridor().context, cfg);
  EXPECT_FALSE(r.success);
  EXPECT_TRUE(r.timed_out);
  EXPECT_EQ(r.failure, "timeout");
  EXPECT_NEAR(r.elapsed, 5.0, 1e-9);
}

TEST(Mission, StallLeavesCommandTimestampsUnchanged) {
  const MissionConfig base = CorridorConfig(4.0, 18.0, 3);
  MissionConfig stalled = base;
  stalled.params.stall_at_s = 2.0;
  stalled.params.stall_s = 1.0;
  const TrialRecord a = RunTrial(SharedCorridor().context, base);
  const TrialRecord b = RunTrial(SharedCorridor().context, stalled);
  ASSERT_TRUE(a.success && b.success) << a.failure << " / " << b.failure;
  // The stall shows up in the async branch.
  double longest = 0.0;
  for (const LocalizationSample& s : b.localization_samples) {
    longest = std::max(longest, s.ms());
  }
  EXPECT_GE(longest, 1000.0);
  const std::size_t n = std::min(a.traces.size(), b.traces.size());
  ASSERT_GT(n, 10u);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(a.traces[i].scan_stamp, b.traces[i].scan_stamp);
    EXPECT_EQ(a.traces[i].command_stamp, b.traces[i].command_stamp) << i;
  }
}

TEST(Mission, Deterministic) {
  const MissionConfig cfg = CorridorConfig(4.0, 12.0, 5);
  const std::string a = RecordToJson(RunTrial(SharedCorridor().context, cfg));
  const std::string b = RecordToJson(RunTrial(SharedCorridor().context, cfg));
  EXPECT_EQ(a, b);
  const std::string c =
      RecordToJson(RunTrial(SharedCorridor().context, CorridorConfig(4.0, 12.0, 6)));
  EXPECT_NE(a, c);
}

TEST(Mission, InitialLocalizationRecoversOperatorGuess) {
  const MissionContext& ctx = testing::SharedMineContext();
  const MissionParams params;
  const RobotState s =
      MakeRobotState(ctx.world, ctx.world.NamedPose("entrance"), params.limits);
  const PointCloud scan = DecimateScan(CastScan(ctx.world, s.true_pose, params.lidar),
                                       params.ndt);
  bool ok = false;
  const RigidTransform guess =
      s.true_pose * RigidTransform::FromPlanar(0.25, -0.15, DegToRad(3.0));
  const RigidTransform est = InitialLocalization(ctx.ndt, scan, guess, params.ndt, &ok);
  EXPECT_TRUE(ok);
  // The planner and controller consume the planar pose.
  const Pose2 e = ProjectSe2(est);
  const Pose2 t = ProjectSe2(s.true_pose);
  EXPECT_LE(std::hypot(e.x - t.x, e.y - t.y), 0.05);
  EXPECT_LE(std::abs(NormalizeAngle(e.yaw - t.yaw)), DegToRad(1.0));
}

TEST(Mission, DriftBandOnThirtyFiveMetreMission) {
  const MissionContext& ctx = testing::SharedMineContext();
  MissionConfig cfg;
  cfg.goal_name = "G3";
  cfg.initial_pose = ctx.world.NamedPose("entrance");
  cfg.goal_pose = ctx.world.NamedPose("g3_deep");
  cfg.seed = 1;
  const TrialRecord r = RunTrial(ctx, cfg);
  ASSERT_TRUE(r.success) << r.failure;
  const CorrectionStats stats = ComputeCorrectionStats(r);
  EXPECT_GE(stats.max_drift, 0.3);
  EXPECT_LE(stats.max_drift, 1.1);
  EXPECT_LT(stats.median_step, 0.05);
  EXPECT_LT(r.final_estimate_error, 0.3);
}

TEST(Mission, ComputeTimesStayOutOfRecord) {
  ComputeTimes times;
  const MissionConfig cfg = CorridorConfig(6.0, 8.0);
  const std::string a = RecordToJson(RunTrial(SharedCorridor().context, cfg, &times));
  EXPECT_FALSE(times.ms["planner"].empty());
  EXPECT_FALSE(times.ms["localization"].empty());
  EXPECT_EQ(a, RecordToJson(RunTrial(SharedCorridor().context, cfg)));
}

}  // namespace
}  // namespace minenav
