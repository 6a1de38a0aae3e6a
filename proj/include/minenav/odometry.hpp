#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "minenav/geometry.hpp"

namespace minenav {

// Drift model for the simulated LiDAR-inertial odometry. Bias and noise are
// applied to each body-frame motion increment.
struct OdometryModel {
  Eigen::Vector3d translation_bias{0.0254, 0.0191, 0.0};  // m per m travelled
  double yaw_bias = 0.01;                                // rad per rad turned
  double noise_std = 0.001;                              // m per step
  std::uint64_t seed = 1;
};

// Stand-in for the LIO output: an odometry frame anchored at the first true
// pose, integrating corrupted increments.
class DriftingOdometry {
 public:
  explicit DriftingOdometry(const OdometryModel& model);

  // Feeds the next true pose (map frame) and returns odom_from_base.
  RigidTransform Update(const RigidTransform& true_pose);

  const RigidTransform& pose() const { return odom_pose_; }
  bool started() const { return started_; }

 private:
  OdometryModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  bool started_ = false;
  RigidTransform last_true_;
  RigidTransform odom_pose_;
};

}  // namespace minenav
