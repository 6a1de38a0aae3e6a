#include "minenav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace minenav {

double NormalizeAngle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

RigidTransform::RigidTransform()
    : translation_(Eigen::Vector3d::Zero()),
      rotation_(Eigen::Quaterniond::Identity()) {}

RigidTransform::RigidTransform(const Eigen::Vector3d& translation,
                               const Eigen::Quaterniond& rotation)
    : translation_(translation), rotation_(rotation) {
  Canonicalize();
}

RigidTransform RigidTransform::Translation(double x, double y, double z) {
  return RigidTransform(Eigen::Vector3d(x, y, z),
                        Eigen::Quaterniond::Identity());
}

RigidTransform RigidTransform::Rotation(const Eigen::Quaterniond& rotation) {
  return RigidTransform(Eigen::Vector3d::Zero(), rotation);
}

RigidTransform RigidTransform::Roll(double angle) {
  return Rotation(
      Eigen::Quaterniond(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX())));
}

RigidTransform RigidTransform::Pitch(double angle) {
  return Rotation(
      Eigen::Quaterniond(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY())));
}

RigidTransform RigidTransform::Yaw(double angle) {
  return Rotation(
      Eigen::Quaterniond(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ())));
}

RigidTransform RigidTransform::FromXyzRpy(double x, double y, double z,
                                          double roll, double pitch,
                                          double yaw) {
  const Eigen::Quaterniond q =
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
      Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
      Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX());
  return RigidTransform(Eigen::Vector3d(x, y, z), q);
}

RigidTransform RigidTransform::FromPlanar(double x, double y, double yaw,
                                          double z) {
  return FromXyzRpy(x, y, z, 0.0, 0.0, yaw);
}

Eigen::Matrix4d RigidTransform::Matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = RotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Eigen::Vector3d RigidTransform::Rpy() const {
  const Eigen::Matrix3d r = RotationMatrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

RigidTransform RigidTransform::Inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return RigidTransform(-(inv * translation_), inv);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return RigidTransform(rotation_ * rhs.translation_ + translation_,
                        rotation_ * rhs.rotation_);
}

bool RigidTransform::IsFinite() const {
  return translation_.allFinite() && rotation_.coeffs().allFinite();
}

void RigidTransform::Canonicalize() {
  const double norm = rotation_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("RigidTransform: invalid quaternion");
  }
  rotation_.coeffs() /= norm;
  if (rotation_.w() < 0.0) rotation_.coeffs() = -rotation_.coeffs();
}

double MaxComponentDifference(const RigidTransform& a, const RigidTransform& b) {
  const double dt = (a.translation() - b.translation()).cwiseAbs().maxCoeff();
  const double dq =
      (a.rotation().coeffs() - b.rotation().coeffs()).cwiseAbs().maxCoeff();
  return std::max(dt, dq);
}

double TranslationDistance(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

double RotationAngle(const RigidTransform& a, const RigidTransform& b) {
  return a.rotation().angularDistance(b.rotation());
}

Pose2 ProjectSe2(const RigidTransform& t) {
  const Eigen::Vector3d x_axis = t.rotation() * Eigen::Vector3d::UnitX();
  return Pose2(t.translation().x(), t.translation().y(),
               std::atan2(x_axis.y(), x_axis.x()));
}

std::string_view FrameName(FrameId frame) {
  switch (frame) {
    case FrameId::kBody:
      return "body";
    case FrameId::kOdom:
      return "odom";
    case FrameId::kMap:
      return "map";
  }
  return "body";
}

FrameId ParseFrame(std::string_view name) {
  if (name == "body") return FrameId::kBody;
  if (name == "odom") return FrameId::kOdom;
  if (name == "map") return FrameId::kMap;
  throw std::invalid_argument("unknown frame id: " + std::string(name));
}

bool PointCloud::AllFinite() const {
  for (const Point& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity)) {
      return false;
    }
  }
  return true;
}

PointCloud TransformCloud(const RigidTransform& t, const PointCloud& cloud,
                          FrameId target_frame) {
  PointCloud out;
  out.frame_id = target_frame;
  out.stamp = cloud.stamp;
  out.points.reserve(cloud.size());
  const Eigen::Matrix3d r = t.RotationMatrix();
  for (const Point& p : cloud.points) {
    const Eigen::Vector3d q = r * p.position() + t.translation();
    out.points.push_back({q.x(), q.y(), q.z(), p.intensity});
  }
  return out;
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud VoxelDownsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw std::invalid_argument("VoxelDownsample: voxel size must be > 0");
  }
  struct Accum {
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    int count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index;
  std::vector<Accum> accums;
  const double inv = 1.0 / voxel_size;
  for (const Point& p : cloud.points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x * inv)),
                       static_cast<std::int64_t>(std::floor(p.y * inv)),
                       static_cast<std::int64_t>(std::floor(p.z * inv))};
    auto [it, inserted] = index.try_emplace(key, accums.size());
    if (inserted) accums.emplace_back();
    Accum& a = accums[it->second];
    a.sum += Eigen::Vector4d(p.x, p.y, p.z, p.intensity);
    ++a.count;
  }
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.stamp = cloud.stamp;
  out.points.reserve(accums.size());
  for (const Accum& a : accums) {
    const Eigen::Vector4d m = a.sum / a.count;
    out.points.push_back({m[0], m[1], m[2], m[3]});
  }
  return out;
}

}  // namespace minenav
