#include "minenav/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minenav {

void ControllerParams::Validate() const {
  if (!(lookahead > 0.0)) throw ControllerError("lookahead must be > 0");
  if (!(v_min > 0.0 && v_min < v_max)) {
    throw ControllerError("need 0 < v_min < v_max");
  }
  if (!(goal_tolerance > 0.0)) throw ControllerError("tolerance must be > 0");
  if (!(omega_max > 0.0)) throw ControllerError("omega_max must be > 0");
  if (!(regulation_radius > 0.0 && proximity_distance > 0.0)) {
    throw ControllerError("regulation distances must be > 0");
  }
}

Eigen::Vector2d LookaheadPoint(const Pose2& pose,
                               const std::vector<Eigen::Vector2d>& path,
                               double lookahead) {
  if (path.empty()) throw ControllerError("empty path");
  const Eigen::Vector2d c = pose.position();
  if (path.size() == 1) return path.front();

  // Closest point on the polyline.
  std::size_t seg = 0;
  double seg_t = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Eigen::Vector2d ab = path[i + 1] - path[i];
    const double l2 = ab.squaredNorm();
    const double t =
        l2 > 0.0 ? std::clamp((c - path[i]).dot(ab) / l2, 0.0, 1.0) : 0.0;
    const double d = (path[i] + t * ab - c).squaredNorm();
    if (d < best) {
      best = d;
      seg = i;
      seg_t = t;
    }
  }

  // Remaining length from the closest point.
  double remaining = (1.0 - seg_t) * (path[seg + 1] - path[seg]).norm();
  for (std::size_t i = seg + 1; i + 1 < path.size(); ++i) {
    remaining += (path[i + 1] - path[i]).norm();
  }
  if (remaining < lookahead) return path.back();

  // Circle-segment intersection, forward from the closest point.
  for (std::size_t i = seg; i + 1 < path.size(); ++i) {
    const Eigen::Vector2d a = path[i];
    const Eigen::Vector2d d = path[i + 1] - a;
    const double qa = d.squaredNorm();
    if (qa == 0.0) continue;
    const Eigen::Vector2d f = a - c;
    const double qb = 2.0 * f.dot(d);
    const double qc = f.squaredNorm() - lookahead * lookahead;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    const double t_min = i == seg ? seg_t : 0.0;
    // Larger root: the exit point along the path direction.
    const double t = (-qb + root) / (2.0 * qa);
    if (t >= t_min && t <= 1.0) return a + t * d;
  }
  // Farther than L from the path: head for the closest point.
  return path[seg] + seg_t * (path[seg + 1] - path[seg]);
}

VelocityCommand PursuitStep(const Pose2& pose,
                            const std::vector<Eigen::Vector2d>& path,
                            const ControllerParams& params) {
  params.Validate();
  if (path.empty()) throw ControllerError("empty path");
  VelocityCommand cmd;
  const double d_goal = (path.back() - pose.position()).norm();
  if (d_goal <= params.goal_tolerance) {
    cmd.done = true;
    return cmd;
  }
  const Eigen::Vector2d target = LookaheadPoint(pose, path, params.lookahead);
  const Eigen::Vector2d rel = target - pose.position();
  const double cy = std::cos(pose.yaw);
  const double sy = std::sin(pose.yaw);
  const double xl = cy * rel.x() + sy * rel.y();
  const double yl = -sy * rel.x() + cy * rel.y();

  if (xl < 0.0) {
    cmd.v = params.v_min;
    cmd.omega = (yl >= 0.0 ? 1.0 : -1.0) * params.omega_max;
    return cmd;
  }
  const double l2 = xl * xl + yl * yl;
  const double kappa = l2 > 0.0 ? 2.0 * yl / l2 : 0.0;
  double v = params.v_max;
  if (std::abs(kappa) > 0.0) {
    const double radius = 1.0 / std::abs(kappa);
    if (radius < params.regulation_radius) {
      v *= radius / params.regulation_radius;
    }
  }
  if (d_goal < params.proximity_distance) {
    v *= d_goal / params.proximity_distance;
  }
  v = std::max(v, params.v_min);
  cmd.v = v;
  cmd.omega = std::clamp(kappa * v, -params.omega_max, params.omega_max);
  return cmd;
}

PursuitController::PursuitController(ControllerParams params)
    : params_(params) {
  params_.Validate();
}

VelocityCommand PursuitController::Step(
    const Pose2& pose, const std::vector<Eigen::Vector2d>& path) {
  if (done_ && path == latched_path_) return {0.0, 0.0, true};
  const VelocityCommand cmd = PursuitStep(pose, path, params_);
  done_ = cmd.done;
  latched_path_ = cmd.done ? path : std::vector<Eigen::Vector2d>{};
  return cmd;
}

}  // namespace minenav
