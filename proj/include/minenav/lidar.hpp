#pragma once

#include <vector>

#include "minenav/geometry.hpp"
#include "minenav/world.hpp"

namespace minenav {

// Multi-channel spinning LiDAR. Channel elevations are spread evenly over
// [-vertical_fov, +vertical_fov]; a single channel looks horizontally.
struct LidarConfig {
  int channels = 16;
  double vertical_fov_deg = 15.0;
  int rays_per_revolution = 720;
  double min_range = 0.75;
  double max_range = 30.0;
  double rate_hz = 10.0;

  double ChannelElevation(int channel) const;
  void Validate() const;
};

enum class Surface { kWall, kFloor, kCeiling };

// Ray-casts the world from `sensor_pose` (map frame). Returns body-frame
// hits with range in [min_range, max_range), intensity 0. When `origins` is
// non-null it receives the surface each point came from, index-aligned.
// Throws WorldError("embedded") when the pose is inside a wall cell.
PointCloud CastScan(const WorldMap& world, const RigidTransform& sensor_pose,
                    const LidarConfig& cfg,
                    std::vector<Surface>* origins = nullptr);

}  // namespace minenav
