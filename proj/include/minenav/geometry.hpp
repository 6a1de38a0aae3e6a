#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace minenav {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double DegToRad(double deg) { return deg * kPi / 180.0; }
inline constexpr double RadToDeg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double NormalizeAngle(double angle);

// Rigid-body transform in SE(3). Active, column-vector convention: a point p
// maps to R * p + t, and (a * b) applies b first, then a.
//
// The rotation is kept as a unit quaternion with non-negative w so two
// transforms describing the same motion compare equal component-wise.
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Eigen::Vector3d& translation,
                 const Eigen::Quaterniond& rotation);

  static RigidTransform Identity() { return RigidTransform(); }
  static RigidTransform Translation(double x, double y, double z);
  static RigidTransform Rotation(const Eigen::Quaterniond& rotation);
  static RigidTransform Roll(double angle);
  static RigidTransform Pitch(double angle);
  static RigidTransform Yaw(double angle);
  // Translation followed by R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static RigidTransform FromXyzRpy(double x, double y, double z, double roll,
                                   double pitch, double yaw);
  // Planar pose lifted to SE(3) at height z.
  static RigidTransform FromPlanar(double x, double y, double yaw,
                                   double z = 0.0);

  const Eigen::Vector3d& translation() const { return translation_; }
  const Eigen::Quaterniond& rotation() const { return rotation_; }
  Eigen::Matrix3d RotationMatrix() const {
    return rotation_.toRotationMatrix();
  }
  Eigen::Matrix4d Matrix() const;

  // Roll, pitch, yaw in the Rz * Ry * Rx factorization.
  Eigen::Vector3d Rpy() const;

  RigidTransform Inverse() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }
  RigidTransform operator*(const RigidTransform& rhs) const;

  bool IsFinite() const;

 private:
  void Canonicalize();

  Eigen::Vector3d translation_;
  Eigen::Quaterniond rotation_;
};

inline RigidTransform Compose(const RigidTransform& a, const RigidTransform& b) {
  return a * b;
}
inline RigidTransform Inverse(const RigidTransform& t) { return t.Inverse(); }

// Largest absolute difference over the 7 stored components.
double MaxComponentDifference(const RigidTransform& a, const RigidTransform& b);

// Translation distance and rotation angle (rad) between two transforms.
double TranslationDistance(const RigidTransform& a, const RigidTransform& b);
double RotationAngle(const RigidTransform& a, const RigidTransform& b);

struct Pose2 {
  Pose2() = default;
  Pose2(double x_in, double y_in, double yaw_in)
      : x(x_in), y(y_in), yaw(NormalizeAngle(yaw_in)) {}

  Eigen::Vector2d position() const { return {x, y}; }

  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

// Heading of the transformed x-axis projected onto the ground plane.
Pose2 ProjectSe2(const RigidTransform& t);

enum class FrameId { kBody, kOdom, kMap };

std::string_view FrameName(FrameId frame);
FrameId ParseFrame(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;

  Eigen::Vector3d position() const { return {x, y, z}; }
};

inline constexpr double kGroundLabel = 0.0;
inline constexpr double kObstacleLabel = 1.0;

struct PointCloud {
  std::vector<Point> points;
  FrameId frame_id = FrameId::kBody;
  double stamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool AllFinite() const;
};

// Maps every point by t; intensity and stamp are preserved.
PointCloud TransformCloud(const RigidTransform& t, const PointCloud& cloud,
                          FrameId target_frame);

// Keeps one centroid per occupied voxel; centroids carry the mean intensity.
// Output order follows first occurrence of each voxel in the input.
PointCloud VoxelDownsample(const PointCloud& cloud, double voxel_size);

}  // namespace minenav
