#include "minenav/odometry.hpp"

#include <cmath>

namespace minenav {

DriftingOdometry::DriftingOdometry(const OdometryModel& model)
    : model_(model), rng_(model.seed) {}

RigidTransform DriftingOdometry::Update(const RigidTransform& true_pose) {
  if (!started_) {
    started_ = true;
    last_true_ = true_pose;
    odom_pose_ = RigidTransform::Identity();
    return odom_pose_;
  }
  const RigidTransform delta = last_true_.Inverse() * true_pose;
  last_true_ = true_pose;

  const Eigen::Vector3d d = delta.translation();
  const double dist = d.norm();
  Eigen::Vector3d corrupted = d + model_.translation_bias * dist;
  if (model_.noise_std > 0.0 && dist > 1e-9) {
    corrupted.x() += model_.noise_std * noise_(rng_);
    corrupted.y() += model_.noise_std * noise_(rng_);
  }
  const double dyaw = delta.Rpy().z();
  const RigidTransform yaw_error = RigidTransform::Yaw(model_.yaw_bias * dyaw);
  const RigidTransform corrupted_delta(corrupted,
                                       (delta.rotation() *
                                        yaw_error.rotation()));
  odom_pose_ = odom_pose_ * corrupted_delta;
  return odom_pose_;
}

}  // namespace minenav
