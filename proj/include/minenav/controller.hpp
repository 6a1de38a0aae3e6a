#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "minenav/geometry.hpp"

namespace minenav {

class ControllerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControllerParams {
  double lookahead = 0.5;
  double v_max = 0.5;
  double v_min = 0.05;
  double regulation_radius = 0.9;   // r_reg
  double proximity_distance = 1.0;  // d_prox
  double goal_tolerance = 0.3;
  double omega_max = 1.0;

  void Validate() const;
};

struct VelocityCommand {
  double v = 0.0;
  double omega = 0.0;
  bool done = false;
};

// First intersection of the radius-L circle around the robot with the path,
// searched forward from the closest path point; the path end when less than
// L of path remains.
Eigen::Vector2d LookaheadPoint(const Pose2& pose,
                               const std::vector<Eigen::Vector2d>& path,
                               double lookahead);

// Regulated pure pursuit. Stateless; see PursuitController for the latch.
VelocityCommand PursuitStep(const Pose2& pose,
                            const std::vector<Eigen::Vector2d>& path,
                            const ControllerParams& params);

// PursuitStep with the goal latch: once done, stays done for the same path.
class PursuitController {
 public:
  explicit PursuitController(ControllerParams params = {});

  VelocityCommand Step(const Pose2& pose,
                       const std::vector<Eigen::Vector2d>& path);
  bool done() const { return done_; }
  const ControllerParams& params() const { return params_; }

 private:
  ControllerParams params_;
  std::vector<Eigen::Vector2d> latched_path_;
  bool done_ = false;
};

}  // namespace minenav
