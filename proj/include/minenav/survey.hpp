#pragma once

#include <vector>

#include "minenav/geometry.hpp"
#include "minenav/lidar.hpp"
#include "minenav/motion.hpp"
#include "minenav/world.hpp"

namespace minenav {

// Poses every `step` metres along the survey route (or, when the world spec has
// none, along each segment polyline in order), heading along the route.
// A route end on a capped corridor end lies on the wall face.
std::vector<Pose2> SurveyPoses(const WorldSpec& spec, double step = 0.5);

// Prior-map cloud (map frame) from scans cast at each survey pose,
// voxel-downsampled to `voxel_size`. Poses in wall cells are skipped.
PointCloud BuildPriorMap(const WorldMap& world,
                         const std::vector<Pose2>& poses,
                         const LidarConfig& lidar, const MotionLimits& limits,
                         double voxel_size = 0.1);

}  // namespace minenav
