#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "minenav/controller.hpp"
#include "minenav/geometry.hpp"
#include "minenav/lidar.hpp"
#include "minenav/motion.hpp"
#include "minenav/ndt.hpp"
#include "minenav/odometry.hpp"
#include "minenav/terrain.hpp"
#include "minenav/trial.hpp"
#include "minenav/visibility_graph.hpp"
#include "minenav/world.hpp"

namespace minenav {

class MissionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Modeled stage durations (ms) on the virtual clock. Each sample is
// scaled by a seeded uniform factor in [1 - jitter, 1 + jitter].
struct StageLatencyModel {
  std::map<std::string, double> critical_ms = {{"driver", 10.0},
                                               {"odometry", 25.0},
                                               {"terrain", 30.0},
                                               {"planner", 80.0},
                                               {"controller", 5.0}};
  double localization_ms = 120.0;
  double jitter = 0.2;
};

struct MissionParams {
  double tick_s = 0.01;
  double scan_rate_hz = 10.0;
  double plan_rate_hz = 2.5;
  double success_radius = 1.0;
  double timeout_s = 300.0;
  // Clearance used for the geodesic reference.
  double geodesic_clearance = 0.3;
  // Operator initial-pose error: uniform in a disc / symmetric interval.
  double initial_xy_error = 0.3;
  double initial_yaw_error = DegToRad(3.0);
  // Continuous NDT correction; startup localization always runs.
  bool localization = true;
  // The first localization job started at or after stall_at_s takes
  // stall_s longer. Negative disables.
  double stall_at_s = -1.0;
  double stall_s = 1.0;

  LidarConfig lidar;
  MotionLimits limits;
  OdometryModel odometry;
  NdtParams ndt;
  CeilingParams ceiling;
  PmfParams pmf;
  PlannerParams planner;
  ControllerParams controller;
  StageLatencyModel latency;

  MissionParams();
  void Validate() const;
  // Scans per plan; scan and plan rates must divide evenly.
  int ScansPerPlan() const;
  int TicksPerScan() const;
};

struct MissionConfig {
  std::filesystem::path world_file;
  std::filesystem::path map_file;
  std::filesystem::path graph_file;  // optional
  std::string goal_name;
  Pose2 initial_pose;  // true start pose
  Pose2 goal_pose;
  std::uint64_t seed = 1;
  MissionParams params;
};

// Read-only inputs shared by all trials of a run.
struct MissionContext {
  WorldMap world;
  PointCloud prior_map;
  NdtGrid ndt;
  VisibilityGraph graph;
};

// Terrain segmentation of the map-frame prior cloud and graph construction.
VisibilityGraph BuildPriorGraph(const PointCloud& prior_map,
                                const MissionParams& params);

// Loads the world, prior map and (when given) the graph; otherwise the
// graph is built from the prior map.
MissionContext LoadMissionContext(const MissionConfig& cfg);
MissionContext MakeMissionContext(WorldMap world, PointCloud prior_map,
                                  const MissionParams& params,
                                  const VisibilityGraph* graph = nullptr);

// Measured wall-clock compute per stage, kept out of the trial record.
struct ComputeTimes {
  std::map<std::string, std::vector<double>> ms;
};

// Runs one closed-loop trial on the virtual clock. Deterministic given
// the config. When `compute` is non-null it receives measured stage times.
TrialRecord RunTrial(const MissionContext& context, const MissionConfig& cfg,
                     ComputeTimes* compute = nullptr);
TrialRecord RunTrial(const MissionConfig& cfg);

// Startup localization from an operator guess: NDT from the guess, then a
// grid of starts around it when that fails. Returns the best converged
// pose, or the guess.
RigidTransform InitialLocalization(const NdtGrid& grid, const PointCloud& scan,
                                   const RigidTransform& guess,
                                   const NdtParams& params, bool* converged);

}  // namespace minenav
