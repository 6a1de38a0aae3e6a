#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace minenav {

// Critical-path stage names, in pipeline order.
inline const std::vector<std::string>& CriticalStages() {
  static const std::vector<std::string> kStages = {
      "driver", "odometry", "terrain", "planner", "controller"};
  return kStages;
}

struct StageSpan {
  std::string stage;
  double enter = 0.0;  // s, virtual clock
  double exit = 0.0;
  double ms() const { return (exit - enter) * 1e3; }
};

// One velocity command traced back to the scan it was computed from.
struct LatencyTrace {
  std::uint64_t scan_index = 0;
  double scan_stamp = 0.0;
  std::vector<StageSpan> stages;
  double command_stamp = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double end_to_end_ms() const { return (command_stamp - scan_stamp) * 1e3; }
};

// One asynchronous localization job.
struct LocalizationSample {
  std::uint64_t scan_index = 0;
  double scan_stamp = 0.0;
  double done_stamp = 0.0;
  bool converged = false;
  double ms() const { return (done_stamp - scan_stamp) * 1e3; }
};

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct TrialRecord {
  std::string goal;
  std::uint64_t seed = 0;
  bool success = false;
  bool contact = false;
  bool timed_out = false;
  bool localization = true;
  std::string failure;  // empty on success
  double start_x = 0.0;
  double start_y = 0.0;
  double goal_x = 0.0;
  double goal_y = 0.0;
  double path_length = 0.0;     // p_i, true trajectory
  double geodesic = 0.0;        // l_i
  double elapsed = 0.0;         // s
  double final_distance = 0.0;  // true pose to goal, m
  // Estimated minus true position at the end, m.
  double final_estimate_error = 0.0;
  // XY change of map_from_odom at each applied update, and its XY offset
  // from the initial correction.
  std::vector<double> correction_steps;
  std::vector<double> correction_offsets;
  std::vector<LatencyTrace> traces;
  std::vector<LocalizationSample> localization_samples;
  std::vector<TrajectorySample> trajectory;
};

}  // namespace minenav
