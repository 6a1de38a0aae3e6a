#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "minenav/geometry.hpp"
#include "test_util.hpp"

namespace minenav {
namespace {

constexpr double kTol = 1e-9;

void ExpectNear(const RigidTransform& a, const RigidTransform& b,
                double tol = kTol) {
  EXPECT_LE(MaxComponentDifference(a, b), tol);
}

// Oracle: homogeneous matrices built independently of RigidTransform.
Eigen::Matrix4d Homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Eigen::Matrix3d Rz(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d Ry(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

TEST(Geometry, ComposeIdentity) {
  ExpectNear(Compose(RigidTransform::Identity(), RigidTransform::Identity()),
             RigidTransform::Identity());
}

TEST(Geometry, ComposeTranslations) {
  ExpectNear(Compose(RigidTransform::Translation(1, 0, 0),
                     RigidTransform::Translation(0, 2, 0)),
             RigidTransform::Translation(1, 2, 0));
}

TEST(Geometry, ComposeYawThenTranslationMatchesHandMatrix) {
  const RigidTransform c = Compose(RigidTransform::Yaw(DegToRad(90.0)),
                                   RigidTransform::Translation(1, 0, 0));
  const Eigen::Matrix4d oracle =
      Homogeneous(Rz(kPi / 2), Eigen::Vector3d::Zero()) *
      Homogeneous(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0));
  EXPECT_LE((c.Matrix() - oracle).cwiseAbs().maxCoeff(), kTol);
  EXPECT_LE((c * Eigen::Vector3d::Zero() - Eigen::Vector3d(0, 1, 0)).norm(),
            kTol);
  EXPECT_NEAR(c.Rpy().z(), kPi / 2, kTol);
}

TEST(Geometry, Inverse) {
  ExpectNear(Inverse(RigidTransform::Identity()), RigidTransform::Identity());
  ExpectNear(Inverse(RigidTransform::Translation(1, 2, 3)),
             RigidTransform::Translation(-1, -2, -3));
  const RigidTransform t = RigidTransform::Yaw(DegToRad(30.0)) *
                           RigidTransform::Translation(1, 0, 0);
  ExpectNear(Compose(t, Inverse(t)), RigidTransform::Identity());
  ExpectNear(Compose(Inverse(t), t), RigidTransform::Identity());
}

TEST(Geometry, RandomizedAlgebra) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform a = testing::RandomTransform(rng);
    const RigidTransform b = testing::RandomTransform(rng);
    const RigidTransform c = testing::RandomTransform(rng);
    ExpectNear(Compose(a, Compose(b, c)), Compose(Compose(a, b), c));
    ExpectNear(Compose(a, Inverse(a)), RigidTransform::Identity());
    EXPECT_NEAR(Compose(a, b).rotation().norm(), 1.0, kTol);
    // Matrix oracle for composition.
    EXPECT_LE(((a * b).Matrix() - a.Matrix() * b.Matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
  }
}

TEST(Geometry, FromXyzRpyMatchesMatrixProduct) {
  const RigidTransform t = RigidTransform::FromXyzRpy(1, 2, 3, 0.1, -0.2, 0.3);
  Eigen::Matrix3d rx;
  rx << 1, 0, 0, 0, std::cos(0.1), -std::sin(0.1), 0, std::sin(0.1),
      std::cos(0.1);
  const Eigen::Matrix3d oracle = Rz(0.3) * Ry(-0.2) * rx;
  EXPECT_LE((t.RotationMatrix() - oracle).cwiseAbs().maxCoeff(), kTol);
  EXPECT_LE((t.Rpy() - Eigen::Vector3d(0.1, -0.2, 0.3)).norm(), kTol);
}

TEST(Geometry, NormalizeAngle) {
  EXPECT_NEAR(NormalizeAngle(3 * kPi), kPi, kTol);
  EXPECT_NEAR(NormalizeAngle(-kPi), kPi, kTol);
  EXPECT_NEAR(NormalizeAngle(kPi), kPi, kTol);
  EXPECT_NEAR(NormalizeAngle(-3 * kPi / 2), kPi / 2, kTol);
  EXPECT_NEAR(Pose2(0, 0, 7.0).yaw, 7.0 - 2 * kPi, kTol);
}

TEST(Geometry, YawNormalizationClosedUnderComposition) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double y1 = a(rng);
    const double y2 = a(rng);
    const Pose2 p = ProjectSe2(RigidTransform::Yaw(y1) * RigidTransform::Yaw(y2));
    EXPECT_GT(p.yaw, -kPi);
    EXPECT_LE(p.yaw, kPi);
    EXPECT_NEAR(std::cos(p.yaw), std::cos(y1 + y2), 1e-9);
    EXPECT_NEAR(std::sin(p.yaw), std::sin(y1 + y2), 1e-9);
  }
}

TEST(Geometry, ProjectSe2) {
  const Pose2 id = ProjectSe2(RigidTransform::Identity());
  EXPECT_EQ(id.x, 0.0);
  EXPECT_EQ(id.y, 0.0);
  EXPECT_EQ(id.yaw, 0.0);
  const Pose2 p = ProjectSe2(RigidTransform::Translation(1, 2, 5) *
                             RigidTransform::Yaw(DegToRad(45.0)));
  EXPECT_NEAR(p.x, 1.0, kTol);
  EXPECT_NEAR(p.y, 2.0, kTol);
  EXPECT_NEAR(p.yaw, DegToRad(45.0), kTol);
}

TEST(Geometry, ProjectSe2UnderPitch) {
  // Rotated x-axis of pitch(10)*yaw(30) is Ry(10) (cos30, sin30, 0); its
  // ground heading is atan2(sin30, cos10 cos30), about 30.38 deg.
  const double p10 = DegToRad(10.0);
  const double y30 = DegToRad(30.0);
  const Pose2 a = ProjectSe2(RigidTransform::Pitch(p10) * RigidTransform::Yaw(y30));
  EXPECT_NEAR(a.yaw, std::atan2(std::sin(y30), std::cos(p10) * std::cos(y30)),
              1e-9);
  // With the yaw applied last the heading is exactly 30 deg.
  const Pose2 b = ProjectSe2(RigidTransform::Yaw(y30) * RigidTransform::Pitch(p10));
  EXPECT_NEAR(b.yaw, y30, 1e-6);
}

TEST(Geometry, TransformCloud) {
  PointCloud c;
  c.points = {{0, 0, 0, 1.0}, {1, 0, 0, 0.0}};
  c.stamp = 4.5;
  const PointCloud same =
      TransformCloud(RigidTransform::Identity(), c, FrameId::kBody);
  ASSERT_EQ(same.size(), 2u);
  EXPECT_EQ(same.points[1].x, 1.0);
  EXPECT_EQ(same.points[0].intensity, 1.0);
  EXPECT_EQ(same.stamp, 4.5);

  const PointCloud up =
      TransformCloud(RigidTransform::Translation(0, 0, 1), c, FrameId::kMap);
  EXPECT_EQ(up.frame_id, FrameId::kMap);
  EXPECT_NEAR(up.points[0].z, 1.0, kTol);

  const PointCloud rot =
      TransformCloud(RigidTransform::Yaw(kPi / 2), c, FrameId::kMap);
  EXPECT_NEAR(rot.points[1].x, 0.0, kTol);
  EXPECT_NEAR(rot.points[1].y, 1.0, kTol);
  EXPECT_NEAR(rot.points[1].z, 0.0, kTol);
}

TEST(Geometry, TransformCloudRoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  PointCloud c;
  for (int i = 0; i < 100; ++i) c.points.push_back({u(rng), u(rng), u(rng), 0.0});
  for (int k = 0; k < 20; ++k) {
    const RigidTransform t = testing::RandomTransform(rng);
    const PointCloud back = TransformCloud(
        Inverse(t), TransformCloud(t, c, FrameId::kMap), FrameId::kBody);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_NEAR(back.points[i].x, c.points[i].x, 1e-9);
      EXPECT_NEAR(back.points[i].y, c.points[i].y, 1e-9);
      EXPECT_NEAR(back.points[i].z, c.points[i].z, 1e-9);
    }
  }
}

TEST(Geometry, VoxelDownsampleKeepsCentroids) {
  PointCloud c;
  c.points = {{0.01, 0.01, 0.01, 0}, {0.03, 0.05, 0.07, 1}, {0.5, 0.5, 0.5, 0}};
  const PointCloud d = VoxelDownsample(c, 0.1);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d.points[0].x, 0.02, 1e-12);
  EXPECT_NEAR(d.points[0].y, 0.03, 1e-12);
  EXPECT_NEAR(d.points[0].intensity, 0.5, 1e-12);
}

TEST(Geometry, FrameNames) {
  for (FrameId f : {FrameId::kBody, FrameId::kOdom, FrameId::kMap}) {
    EXPECT_EQ(ParseFrame(FrameName(f)), f);
  }
  EXPECT_THROW(ParseFrame("base_link"), std::invalid_argument);
}

}  // namespace
}  // namespace minenav
