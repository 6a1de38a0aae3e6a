#pragma once

#include "minenav/geometry.hpp"
#include "minenav/world.hpp"

namespace minenav {

struct MotionLimits {
  double max_linear = 0.5;    // m/s, platform limit
  double max_angular = 1.0;   // rad/s
  double body_radius = 0.3;   // m, collision footprint
  double sensor_height = 0.6; // m above the floor
};

struct RobotState {
  RigidTransform true_pose;  // map frame, sensor origin
  double v = 0.0;
  double omega = 0.0;
  double time = 0.0;
  bool contact = false;
};

// Places the robot on the floor at a planar pose.
RobotState MakeRobotState(const WorldMap& world, const Pose2& pose,
                          const MotionLimits& limits, double time = 0.0);

// Exact unicycle arc integration of a (v, omega) command over dt. Commands
// are clamped to the limits. A disc of body_radius touching a wall cell
// halts the robot at its last collision-free pose and flags contact.
RobotState StepMotion(const WorldMap& world, const RobotState& state,
                      double v, double omega, double dt,
                      const MotionLimits& limits);

// Closed-form planar displacement of a unicycle arc, in the start frame.
Pose2 IntegrateArc(double v, double omega, double dt);

}  // namespace minenav
