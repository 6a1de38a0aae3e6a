#include "minenav/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minenav {

RobotState MakeRobotState(const WorldMap& world, const Pose2& pose,
                          const MotionLimits& limits, double time) {
  RobotState s;
  s.true_pose = RigidTransform::FromPlanar(
      pose.x, pose.y, pose.yaw,
      world.FloorZAt(pose.x, pose.y) + limits.sensor_height);
  s.time = time;
  return s;
}

Pose2 IntegrateArc(double v, double omega, double dt) {
  const double theta = omega * dt;
  if (std::abs(omega) < 1e-9) return Pose2(v * dt, 0.0, theta);
  const double r = v / omega;
  return Pose2(r * std::sin(theta), r * (1.0 - std::cos(theta)), theta);
}

RobotState StepMotion(const WorldMap& world, const RobotState& state,
                      double v, double omega, double dt,
                      const MotionLimits& limits) {
  if (!(dt > 0.0)) throw std::invalid_argument("StepMotion: dt must be > 0");
  v = std::clamp(v, -limits.max_linear, limits.max_linear);
  omega = std::clamp(omega, -limits.max_angular, limits.max_angular);

  const Pose2 start = ProjectSe2(state.true_pose);
  RobotState next = state;
  next.v = v;
  next.omega = omega;
  next.time = state.time + dt;

  // Collision is checked along the arc every few centimetres.
  const double arc_len = std::abs(v) * dt;
  const int substeps = std::max(1, static_cast<int>(std::ceil(arc_len / 0.05)));
  Pose2 last_free = start;
  for (int k = 1; k <= substeps; ++k) {
    const double sub_dt = dt * k / substeps;
    const Pose2 d = IntegrateArc(v, omega, sub_dt);
    const double c = std::cos(start.yaw);
    const double s = std::sin(start.yaw);
    const Pose2 candidate(start.x + c * d.x - s * d.y,
                          start.y + s * d.x + c * d.y, start.yaw + d.yaw);
    if (arc_len > 0.0 &&
        world.DistanceToWall(candidate.x, candidate.y, limits.body_radius) <
            limits.body_radius) {
      next.contact = true;
      next.v = 0.0;
      next.omega = 0.0;
      break;
    }
    last_free = candidate;
  }
  next.true_pose = RigidTransform::FromPlanar(
      last_free.x, last_free.y, last_free.yaw,
      world.FloorZAt(last_free.x, last_free.y) + limits.sensor_height);
  return next;
}

}  // namespace minenav
