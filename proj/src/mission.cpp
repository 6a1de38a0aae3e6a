#include "minenav/mission.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "minenav/correction.hpp"
#include "minenav/metrics.hpp"
#include "minenav/pcd_io.hpp"
#include "minenav/graph_io.hpp"

namespace minenav {

namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Independent deterministic stream per (seed, purpose).
std::mt19937_64 Stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

bool IsMultiple(double ratio) {
  return ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) < 1e-9;
}

// Nearest point outside every inflated obstacle, searched on rings.
Eigen::Vector2d SnapFree(const VisibilityGraph& graph,
                         const Eigen::Vector2d& p) {
  const ObstacleIndex* index = graph.index.get();
  if (!index || !index->Interior(p)) return p;
  const double step = graph.params.resolution;
  for (double r = step; r <= 3.0; r += step) {
    for (int k = 0; k < 32; ++k) {
      const double a = 2.0 * kPi * k / 32.0;
      const Eigen::Vector2d q = p + r * Eigen::Vector2d(std::cos(a), std::sin(a));
      if (!index->Interior(q)) return q;
    }
  }
  throw PlannerError("in collision");
}

double XyDistance(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation().head<2>() - b.translation().head<2>()).norm();
}

struct PendingCommand {
  long long tick = 0;
  VelocityCommand command;
};

struct LocalizationJob {
  bool active = false;
  long long done_tick = 0;
  bool converged = false;
  CorrectionState result;
};

}  // namespace

MissionParams::MissionParams() { pmf.support_z = -limits.sensor_height; }

void MissionParams::Validate() const {
  if (!(tick_s > 0.0)) throw MissionError("tick must be > 0");
  if (!(scan_rate_hz > 0.0) || !(plan_rate_hz > 0.0)) {
    throw MissionError("rates must be > 0");
  }
  if (!IsMultiple(1.0 / (scan_rate_hz * tick_s))) {
    throw MissionError("scan period must be a whole number of ticks");
  }
  if (!IsMultiple(scan_rate_hz / plan_rate_hz)) {
    throw MissionError("plan rate must divide the scan rate");
  }
  if (!(success_radius > controller.goal_tolerance)) {
    throw MissionError("success radius must exceed the goal tolerance");
  }
  if (!(timeout_s > 0.0)) throw MissionError("timeout must be > 0");
  if (initial_xy_error < 0.0 || initial_yaw_error < 0.0) {
    throw MissionError("initial pose error must be >= 0");
  }
  for (const std::string& stage : CriticalStages()) {
    auto it = latency.critical_ms.find(stage);
    if (it == latency.critical_ms.end() || !(it->second >= 0.0)) {
      throw MissionError("missing latency for stage " + stage);
    }
  }
  if (!(latency.jitter >= 0.0 && latency.jitter < 1.0)) {
    throw MissionError("latency jitter must be in [0, 1)");
  }
  lidar.Validate();
  ndt.Validate();
  pmf.Validate();
  planner.Validate();
  controller.Validate();
}

int MissionParams::ScansPerPlan() const {
  return static_cast<int>(std::lround(scan_rate_hz / plan_rate_hz));
}

int MissionParams::TicksPerScan() const {
  return static_cast<int>(std::lround(1.0 / (scan_rate_hz * tick_s)));
}

VisibilityGraph BuildPriorGraph(const PointCloud& prior_map,
                                const MissionParams& params) {
  CeilingParams ceiling = params.ceiling;
  ceiling.z_max += params.limits.sensor_height;
  PmfParams pmf = params.pmf;
  pmf.support_z = std::numeric_limits<double>::quiet_NaN();
  return BuildGraphFromCloud(SegmentTerrain(prior_map, ceiling, pmf),
                             params.planner);
}

MissionContext MakeMissionContext(WorldMap world, PointCloud prior_map,
                                  const MissionParams& params,
                                  const VisibilityGraph* graph) {
  if (prior_map.empty()) throw MissionError("prior map is empty");
  MissionContext ctx;
  ctx.world = std::move(world);
  ctx.prior_map = std::move(prior_map);
  ctx.ndt = BuildNdtGrid(ctx.prior_map, params.ndt);
  ctx.graph = graph ? *graph : BuildPriorGraph(ctx.prior_map, params);
  return ctx;
}

MissionContext LoadMissionContext(const MissionConfig& cfg) {
  WorldMap world = LoadWorld(cfg.world_file);
  PointCloud map = ReadPcd(cfg.map_file);
  if (cfg.graph_file.empty()) {
    return MakeMissionContext(std::move(world), std::move(map), cfg.params);
  }
  const VisibilityGraph graph = LoadGraph(cfg.graph_file);
  return MakeMissionContext(std::move(world), std::move(map), cfg.params,
                            &graph);
}

RigidTransform InitialLocalization(const NdtGrid& grid, const PointCloud& scan,
                                   const RigidTransform& guess,
                                   const NdtParams& params, bool* converged) {
  NdtResult best = NdtAlign(grid, scan, guess, params);
  if (!best.converged) {
    const Pose2 g = ProjectSe2(guess);
    const double z = guess.translation().z();
    for (double dx = -1.0; dx <= 1.0 + 1e-9; dx += 0.5) {
      for (double dy = -1.0; dy <= 1.0 + 1e-9; dy += 0.5) {
        for (double dyaw = -0.2; dyaw <= 0.2 + 1e-9; dyaw += 0.1) {
          const NdtResult r = NdtAlign(
              grid, scan,
              RigidTransform::FromPlanar(g.x + dx, g.y + dy, g.yaw + dyaw, z),
              params);
          if (r.converged && (!best.converged || r.score > best.score)) {
            best = r;
          }
        }
      }
    }
  }
  if (converged) *converged = best.converged;
  return best.converged ? best.pose : guess;
}

TrialRecord RunTrial(const MissionContext& context, const MissionConfig& cfg,
                     ComputeTimes* compute) {
  const MissionParams& p = cfg.params;
  p.Validate();
  const WorldMap& world = context.world;
  auto timed = [compute](const std::string& stage, Clock::time_point start) {
    if (compute) compute->ms[stage].push_back(MsSince(start));
  };

  TrialRecord rec;
  rec.goal = cfg.goal_name;
  rec.seed = cfg.seed;
  rec.localization = p.localization;
  rec.start_x = cfg.initial_pose.x;
  rec.start_y = cfg.initial_pose.y;
  rec.goal_x = cfg.goal_pose.x;
  rec.goal_y = cfg.goal_pose.y;
  const Eigen::Vector2d goal_xy = cfg.goal_pose.position();
  std::string geodesic_error;
  try {
    rec.geodesic = GeodesicDistance(world, cfg.initial_pose.position(),
                                    goal_xy, p.geodesic_clearance);
  } catch (const MetricsError& e) {
    rec.geodesic = 0.0;
    geodesic_error = std::string("geodesic: ") + e.what();
  }

  std::mt19937_64 init_rng = Stream(cfg.seed, 1);
  std::mt19937_64 latency_rng = Stream(cfg.seed, 2);
  // Separate stream so localization never shifts critical-path jitter.
  std::mt19937_64 localization_rng = Stream(cfg.seed, 4);
  OdometryModel odom_model = p.odometry;
  odom_model.seed = Stream(cfg.seed, 3)();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(1.0 - p.latency.jitter,
                                                1.0 + p.latency.jitter);
  auto stage_s = [&](double ms) { return ms * jitter(latency_rng) * 1e-3; };
  auto localization_s = [&](double ms) {
    return ms * jitter(localization_rng) * 1e-3;
  };

  RobotState state = MakeRobotState(world, cfg.initial_pose, p.limits);
  DriftingOdometry odometry(odom_model);
  RigidTransform odom_pose = odometry.Update(state.true_pose);

  // Operator guess within initial_xy_error / initial_yaw_error of truth.
  const double r = p.initial_xy_error * std::sqrt(unit(init_rng));
  const double a = 2.0 * kPi * unit(init_rng);
  const double yaw_err = p.initial_yaw_error * (2.0 * unit(init_rng) - 1.0);
  const Pose2 guess2(cfg.initial_pose.x + r * std::cos(a),
                     cfg.initial_pose.y + r * std::sin(a),
                     cfg.initial_pose.yaw + yaw_err);
  const RigidTransform guess = RigidTransform::FromPlanar(
      guess2.x, guess2.y, guess2.yaw,
      state.true_pose.translation().z());
  PointCloud first_scan = CastScan(world, state.true_pose, p.lidar);
  bool startup_ok = false;
  const RigidTransform initial =
      InitialLocalization(context.ndt, DecimateScan(first_scan, p.ndt), guess,
                          p.ndt, &startup_ok);
  CorrectionState correction = InitialCorrection(initial, odom_pose, 0.0);
  const CorrectionState initial_correction = correction;

  VisibilityGraph graph = context.graph;
  PursuitController controller(p.controller);
  std::vector<Eigen::Vector2d> path;
  VelocityCommand command;
  std::deque<PendingCommand> commands;
  LocalizationJob job;
  bool stall_used = false;
  bool finished = false;
  bool failed = false;

  const int ticks_per_scan = p.TicksPerScan();
  const int scans_per_plan = p.ScansPerPlan();
  const long long timeout_ticks =
      static_cast<long long>(std::ceil(p.timeout_s / p.tick_s - 1e-9));
  auto to_tick = [&](double t) {
    return static_cast<long long>(std::ceil(t / p.tick_s - 1e-9));
  };

  long long k = 0;
  double t = 0.0;
  for (;; ++k) {
    t = k * p.tick_s;
    if (failed) break;

    if (job.active && job.done_tick <= k) {
      job.active = false;
      if (job.converged) {
        const CorrectionState previous = correction;
        correction = job.result;
        rec.correction_steps.push_back(
            XyDistance(previous.map_from_odom, correction.map_from_odom));
        rec.correction_offsets.push_back(XyDistance(
            initial_correction.map_from_odom, correction.map_from_odom));
      }
    }
    while (!commands.empty() && commands.front().tick <= k) {
      command = commands.front().command;
      commands.pop_front();
      if (command.done) finished = true;
    }
    if (finished) break;

    if (k % ticks_per_scan == 0) {
      const std::uint64_t scan_index = k / ticks_per_scan;
      odom_pose = odometry.Update(state.true_pose);
      rec.trajectory.push_back({t, ProjectSe2(state.true_pose).x,
                                ProjectSe2(state.true_pose).y,
                                ProjectSe2(state.true_pose).yaw});
      const bool plan_scan = scan_index % scans_per_plan == 0;
      const bool loc_scan = p.localization && !job.active;
      PointCloud scan;
      if (scan_index == 0) {
        scan = first_scan;
      } else if (plan_scan || loc_scan) {
        const auto start = Clock::now();
        scan = CastScan(world, state.true_pose, p.lidar);
        timed("driver", start);
      }
      scan.stamp = t;

      if (loc_scan) {
        const auto start = Clock::now();
        const NdtResult result =
            NdtAlign(context.ndt, DecimateScan(scan, p.ndt),
                     PredictPose(correction, odom_pose), p.ndt);
        timed("localization", start);
        double done = t + localization_s(p.latency.localization_ms);
        if (p.stall_at_s >= 0.0 && !stall_used && t >= p.stall_at_s - 1e-9) {
          done += p.stall_s;
          stall_used = true;
        }
        job.active = true;
        job.done_tick = std::max(k + 1, to_tick(done));
        job.converged = result.converged;
        if (result.converged) {
          job.result = UpdateCorrection(correction, result.pose, odom_pose, t,
                                        result.score);
        }
        rec.localization_samples.push_back(
            {scan_index, t, job.done_tick * p.tick_s, result.converged});
      }

      if (plan_scan) {
        LatencyTrace trace;
        trace.scan_index = scan_index;
        trace.scan_stamp = t;
        double stamp = t;
        auto span = [&](const std::string& stage) {
          const double enter = stamp;
          stamp += stage_s(p.latency.critical_ms.at(stage));
          trace.stages.push_back({stage, enter, stamp});
        };
        span("driver");
        const RigidTransform estimate = PredictPose(correction, odom_pose);
        const Pose2 estimate2 = ProjectSe2(estimate);
        span("odometry");

        auto start = Clock::now();
        const PointCloud labeled = SegmentTerrain(scan, p.ceiling, p.pmf);
        PointCloud obstacles;
        obstacles.frame_id = FrameId::kBody;
        for (const Point& pt : labeled.points) {
          if (pt.intensity == kObstacleLabel) obstacles.points.push_back(pt);
        }
        const PointCloud map_obstacles =
            TransformCloud(estimate, obstacles, FrameId::kMap);
        timed("terrain", start);
        span("terrain");

        start = Clock::now();
        UpdateGraph(&graph, map_obstacles, estimate2.position());
        PlanResult plan;
        try {
          plan = Plan(graph, SnapFree(graph, estimate2.position()),
                      SnapFree(graph, goal_xy));
        } catch (const PlannerError& e) {
          rec.failure = e.what();
          failed = true;
        }
        timed("planner", start);
        span("planner");
        if (failed) continue;
        if (plan.reachable) {
          path = std::move(plan.path);
        } else if (path.empty()) {
          rec.failure = "unreachable";
          failed = true;
          continue;
        }

        start = Clock::now();
        const VelocityCommand cmd = controller.Step(estimate2, path);
        timed("controller", start);
        span("controller");
        trace.command_stamp = stamp;
        trace.v = cmd.v;
        trace.omega = cmd.omega;
        rec.traces.push_back(std::move(trace));
        commands.push_back({std::max(k + 1, to_tick(stamp)), cmd});
      }
    }

    if (k >= timeout_ticks) {
      rec.timed_out = true;
      rec.failure = "timeout";
      break;
    }
    state = StepMotion(world, state, command.v, command.omega, p.tick_s,
                       p.limits);
    if (state.contact) {
      rec.contact = true;
      rec.failure = "contact";
      break;
    }
  }

  const Pose2 final_pose = ProjectSe2(state.true_pose);
  if (rec.trajectory.empty() || rec.trajectory.back().t != t) {
    rec.trajectory.push_back({t, final_pose.x, final_pose.y, final_pose.yaw});
  }
  odom_pose = odometry.Update(state.true_pose);
  rec.elapsed = t;
  rec.path_length = PathLength(rec.trajectory);
  rec.final_distance = (final_pose.position() - goal_xy).norm();
  rec.final_estimate_error =
      XyDistance(PredictPose(correction, odom_pose), state.true_pose);
  if (finished && !rec.contact) {
    if (rec.final_distance <= p.success_radius) {
      rec.success = rec.failure.empty();
    } else if (rec.failure.empty()) {
      rec.failure = "stopped outside the success radius";
    }
  }
  if (!geodesic_error.empty() && rec.failure.empty()) {
    rec.success = false;
    rec.failure = geodesic_error;
  }
  if (!startup_ok && rec.failure.empty() && !rec.success) {
    rec.failure = "startup localization failed";
  }
  return rec;
}

TrialRecord RunTrial(const MissionConfig& cfg) {
  return RunTrial(LoadMissionContext(cfg), cfg);
}

}  // namespace minenav
