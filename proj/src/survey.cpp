#include "minenav/survey.hpp"

#include <cmath>
#include <stdexcept>

namespace minenav {

namespace {

void SamplePolyline(const std::vector<Eigen::Vector2d>& line, double step,
                    std::vector<Pose2>* out) {
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Eigen::Vector2d d = line[i + 1] - line[i];
    const double len = d.norm();
    if (len <= 0.0) continue;
    const double yaw = std::atan2(d.y(), d.x());
    const int n = static_cast<int>(std::ceil(len / step));
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d p = line[i] + d * (static_cast<double>(k) / n);
      out->emplace_back(p.x(), p.y(), yaw);
    }
  }
  if (line.size() >= 2) {
    const Eigen::Vector2d d = line.back() - line[line.size() - 2];
    out->emplace_back(line.back().x(), line.back().y(),
                      std::atan2(d.y(), d.x()));
  }
}

}  // namespace

std::vector<Pose2> SurveyPoses(const WorldSpec& spec, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("survey step must be > 0");
  std::vector<Pose2> poses;
  if (!spec.survey_route.empty()) {
    SamplePolyline(spec.survey_route, step, &poses);
  } else {
    for (const CorridorSegment& seg : spec.segments) {
      SamplePolyline(seg.polyline, step, &poses);
    }
  }
  return poses;
}

PointCloud BuildPriorMap(const WorldMap& world,
                         const std::vector<Pose2>& poses,
                         const LidarConfig& lidar, const MotionLimits& limits,
                         double voxel_size) {
  PointCloud merged;
  merged.frame_id = FrameId::kMap;
  for (const Pose2& pose : poses) {
    if (world.IsWallAt(pose.x, pose.y)) continue;
    const RobotState state = MakeRobotState(world, pose, limits);
    const PointCloud scan = CastScan(world, state.true_pose, lidar);
    const PointCloud in_map =
        TransformCloud(state.true_pose, scan, FrameId::kMap);
    merged.points.insert(merged.points.end(), in_map.points.begin(),
                         in_map.points.end());
    // Keep the working set bounded on long routes.
    if (merged.size() > 2000000) merged = VoxelDownsample(merged, voxel_size);
  }
  return VoxelDownsample(merged, voxel_size);
}

}  // namespace minenav
