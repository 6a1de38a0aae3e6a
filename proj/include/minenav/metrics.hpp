#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "minenav/trial.hpp"
#include "minenav/world.hpp"

namespace minenav {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest 8-connected path over free cells at least `clearance` from any
// wall (diagonal steps cost sqrt(2) * resolution). Throws MetricsError when
// an endpoint is blocked or no route exists.
double GeodesicDistance(const WorldMap& world, const Eigen::Vector2d& start,
                        const Eigen::Vector2d& goal, double clearance);
// Same search, returning cell-centre waypoints from start to goal.
std::vector<Eigen::Vector2d> GeodesicPath(const WorldMap& world,
                                          const Eigen::Vector2d& start,
                                          const Eigen::Vector2d& goal,
                                          double clearance);

// (1/N) sum S_i * l_i / max(p_i, l_i).
double Spl(const std::vector<TrialRecord>& records);
double SuccessRate(const std::vector<TrialRecord>& records);

double PathLength(const std::vector<TrajectorySample>& trajectory);

struct StageStats {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double p95 = 0.0;
};

StageStats Summarize(std::vector<double> values);

struct LatencyReport {
  // Critical-path stages present in at least one trace.
  std::map<std::string, StageStats> stages;
  StageStats end_to_end;
  // Asynchronous branch, not part of end_to_end.
  StageStats localization;
};

LatencyReport MakeLatencyReport(
    const std::vector<LatencyTrace>& traces,
    const std::vector<LocalizationSample>& localization = {});

struct CorrectionStats {
  double median_step = 0.0;
  double max_drift = 0.0;
};

CorrectionStats ComputeCorrectionStats(const TrialRecord& record);

}  // namespace minenav
