#include "minenav/lidar.hpp"

#include <cmath>
#include <limits>

namespace minenav {

double LidarConfig::ChannelElevation(int channel) const {
  if (channels == 1) return 0.0;
  const double fov = DegToRad(vertical_fov_deg);
  return -fov + channel * (2.0 * fov) / (channels - 1);
}

void LidarConfig::Validate() const {
  if (channels < 1) throw std::invalid_argument("lidar needs >= 1 channel");
  if (rays_per_revolution < 1) {
    throw std::invalid_argument("lidar needs >= 1 ray per revolution");
  }
  if (!(min_range >= 0.0 && min_range < max_range)) {
    throw std::invalid_argument("lidar min range must be < max range");
  }
}

namespace {

struct RayHit {
  double range = 0.0;
  Surface surface = Surface::kWall;
};

// Amanatides-Woo traversal over the XY grid with analytic floor/ceiling
// plane tests inside each free cell. Returns false when nothing is hit
// before max_range.
bool TraceRay(const WorldMap& world, const Eigen::Vector3d& origin,
              const Eigen::Vector3d& dir, double max_range, RayHit* hit) {
  const double res = world.resolution();
  CellIndex cell = world.CellAt(origin.x(), origin.y());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const int step_x = dir.x() > 0.0 ? 1 : (dir.x() < 0.0 ? -1 : 0);
  const int step_y = dir.y() > 0.0 ? 1 : (dir.y() < 0.0 ? -1 : 0);
  double t_max_x = kInf;
  double t_max_y = kInf;
  double t_delta_x = kInf;
  double t_delta_y = kInf;
  if (step_x != 0) {
    const double boundary = (cell.ix + (step_x > 0 ? 1 : 0)) * res;
    t_max_x = (boundary - origin.x()) / dir.x();
    t_delta_x = res / std::abs(dir.x());
  }
  if (step_y != 0) {
    const double boundary = (cell.iy + (step_y > 0 ? 1 : 0)) * res;
    t_max_y = (boundary - origin.y()) / dir.y();
    t_delta_y = res / std::abs(dir.y());
  }

  double t_in = 0.0;
  while (t_in < max_range) {
    const double t_out = std::min(t_max_x, t_max_y);
    const double floor_z = world.FloorZ(cell.ix, cell.iy);
    const double ceil_z = world.CeilingZ(cell.ix, cell.iy);
    if (dir.z() < 0.0) {
      const double tf = (floor_z - origin.z()) / dir.z();
      if (tf >= t_in && tf <= t_out) {
        if (tf >= max_range) return false;
        *hit = {tf, Surface::kFloor};
        return true;
      }
    } else if (dir.z() > 0.0) {
      const double tc = (ceil_z - origin.z()) / dir.z();
      if (tc >= t_in && tc <= t_out) {
        if (tc >= max_range) return false;
        *hit = {tc, Surface::kCeiling};
        return true;
      }
    }
    if (t_out >= max_range) return false;

    if (t_max_x < t_max_y) {
      cell.ix += step_x;
      t_max_x += t_delta_x;
    } else {
      cell.iy += step_y;
      t_max_y += t_delta_y;
    }
    t_in = t_out;
    if (world.IsWall(cell.ix, cell.iy)) {
      *hit = {t_in, Surface::kWall};
      return true;
    }
    // Steps in floor/ceiling height between neighbouring cells.
    const double z = origin.z() + dir.z() * t_in;
    if (z < world.FloorZ(cell.ix, cell.iy)) {
      *hit = {t_in, Surface::kFloor};
      return true;
    }
    if (z > world.CeilingZ(cell.ix, cell.iy)) {
      *hit = {t_in, Surface::kCeiling};
      return true;
    }
  }
  return false;
}

}  // namespace

PointCloud CastScan(const WorldMap& world, const RigidTransform& sensor_pose,
                    const LidarConfig& cfg, std::vector<Surface>* origins) {
  cfg.Validate();
  const Eigen::Vector3d origin = sensor_pose.translation();
  if (world.IsWallAt(origin.x(), origin.y())) {
    throw WorldError("embedded");
  }
  PointCloud cloud;
  cloud.frame_id = FrameId::kBody;
  if (origins) origins->clear();

  const Eigen::Matrix3d rot = sensor_pose.RotationMatrix();
  std::vector<double> cos_el(cfg.channels), sin_el(cfg.channels);
  for (int c = 0; c < cfg.channels; ++c) {
    const double e = cfg.ChannelElevation(c);
    cos_el[c] = std::cos(e);
    sin_el[c] = std::sin(e);
  }
  cloud.points.reserve(static_cast<std::size_t>(cfg.channels) *
                       cfg.rays_per_revolution);
  for (int a = 0; a < cfg.rays_per_revolution; ++a) {
    const double az = 2.0 * kPi * a / cfg.rays_per_revolution;
    const double ca = std::cos(az);
    const double sa = std::sin(az);
    for (int c = 0; c < cfg.channels; ++c) {
      const Eigen::Vector3d dir_body(cos_el[c] * ca, cos_el[c] * sa, sin_el[c]);
      const Eigen::Vector3d dir = rot * dir_body;
      RayHit hit;
      if (!TraceRay(world, origin, dir, cfg.max_range, &hit)) continue;
      if (hit.range < cfg.min_range || hit.range >= cfg.max_range) continue;
      const Eigen::Vector3d p = hit.range * dir_body;
      cloud.points.push_back({p.x(), p.y(), p.z(), 0.0});
      if (origins) origins->push_back(hit.surface);
    }
  }
  return cloud;
}

}  // namespace minenav
