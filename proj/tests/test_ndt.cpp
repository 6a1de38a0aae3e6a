#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "minenav/correction.hpp"
#include "minenav/lidar.hpp"
#include "minenav/motion.hpp"
#include "minenav/ndt.hpp"
#include "test_util.hpp"

namespace minenav {
namespace {

const NdtGrid& MineGrid() {
  static const NdtGrid grid =
      BuildNdtGrid(testing::SharedMine().prior_map, NdtParams{});
  return grid;
}

PointCloud ScanAt(const RigidTransform& pose) {
  return DecimateScan(CastScan(testing::SharedMine().world, pose, LidarConfig{}),
                      NdtParams{});
}

TEST(NdtGrid, IdenticalPointsGetFlooredCovariance) {
  PointCloud c;
  for (int i = 0; i < 8; ++i) c.points.push_back({0.5, 0.5, 0.5, 0.0});
  const NdtParams params;
  const NdtGrid grid = BuildNdtGrid(c, params);
  ASSERT_EQ(grid.size(), 1u);
  const NdtVoxel* v = grid.Find({0.5, 0.5, 0.5});
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(v->count, 8);
  EXPECT_LE((v->covariance - params.min_eigenvalue * Eigen::Matrix3d::Identity())
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(NdtGrid, PlanarScatterRaisedToRatioFloor) {
  // Planar scatter: eigenvalues {a, b, 0}.
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(0, 0) = 0.08;
  cov(1, 1) = 0.05;
  const Eigen::Matrix3d rot =
      RigidTransform::FromXyzRpy(0, 0, 0, 0.3, -0.4, 1.1).RotationMatrix();
  const Eigen::Matrix3d planar = rot * cov * rot.transpose();
  const Eigen::Matrix3d reg = RegularizeCovariance(planar, 1e-3, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(reg);
  EXPECT_NEAR(es.eigenvalues()[0], 1e-3 * 0.08, 1e-12);
  EXPECT_NEAR(es.eigenvalues()[1], 0.05, 1e-12);
  EXPECT_NEAR(es.eigenvalues()[2], 0.08, 1e-12);
  // The normal direction carries the floored eigenvalue.
  const Eigen::Vector3d normal = rot.col(2);
  EXPECT_NEAR(normal.dot(reg * normal), 8e-5, 1e-12);
}

TEST(NdtGrid, SparseVoxelDropped) {
  PointCloud c;
  for (int i = 0; i < 4; ++i) c.points.push_back({0.1 * i, 0.2, 0.3, 0.0});
  for (int i = 0; i < 5; ++i) c.points.push_back({5.0 + 0.1 * i, 0.2, 0.3, 0.0});
  const NdtGrid grid = BuildNdtGrid(c, NdtParams{});
  EXPECT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid.Find({0.1, 0.2, 0.3}), nullptr);
  EXPECT_NE(grid.Find({5.1, 0.2, 0.3}), nullptr);
  PointCloud sparse;
  sparse.points.assign(c.points.begin(), c.points.begin() + 4);
  EXPECT_THROW(BuildNdtGrid(sparse, NdtParams{}), NdtError);
  EXPECT_THROW(BuildNdtGrid(PointCloud{}, NdtParams{}), NdtError);
}

TEST(NdtGrid, VoxelMeansMatchBruteForce) {
  const PointCloud& map = testing::SharedMine().prior_map;
  const NdtGrid& grid = MineGrid();
  // Oracle: accumulate the points of a few voxels directly.
  for (std::size_t k = 0; k < map.size(); k += map.size() / 7) {
    const Eigen::Vector3d p = map.points[k].position();
    const Eigen::Vector3d key = (p.array() / grid.voxel_size()).floor();
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int n = 0;
    for (const Point& q : map.points) {
      if (((q.position().array() / grid.voxel_size()).floor() == key.array()).all()) {
        sum += q.position();
        ++n;
      }
    }
    const NdtVoxel* v = grid.Find(p);
    if (n < NdtParams{}.min_points_per_voxel) {
      EXPECT_EQ(v, nullptr);
      continue;
    }
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(v->count, n);
    EXPECT_LE((v->mean - sum / n).norm(), 1e-9);
  }
}

TEST(NdtAlign, SelfAlignmentExactOptimum) {
  // Voxel means scored against their own voxel only: truth is a stationary
  // point of the score, so the optimizer must not move.
  const NdtGrid& grid = MineGrid();
  const RigidTransform truth = RigidTransform::FromPlanar(20.0, 8.3, 0.2, 0.6);
  const RigidTransform inv = truth.Inverse();
  PointCloud scan;
  for (const NdtVoxel& v : grid.voxels()) {
    if ((v.mean - truth.translation()).head<2>().norm() < 12.0) {
      const Eigen::Vector3d q = inv * v.mean;
      scan.points.push_back({q.x(), q.y(), q.z(), 0.0});
    }
  }
  NdtParams params;
  params.neighbor_radius = 0;
  const NdtResult r = NdtAlign(grid, scan, truth, params);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE(TranslationDistance(r.pose, truth), 1e-6);
  EXPECT_LE(RotationAngle(r.pose, truth), 1e-6);
}

TEST(NdtAlign, SelfAlignmentCastScan) {
  const RigidTransform truth = RigidTransform::FromPlanar(20.0, 8.3, 0.2, 0.6);
  const NdtResult r = NdtAlign(MineGrid(), ScanAt(truth), truth, NdtParams{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE(TranslationDistance(r.pose, truth), 0.01);
  EXPECT_LE(RotationAngle(r.pose, truth), DegToRad(0.2));
}

TEST(NdtAlign, ScoreHistoryIsMonotone) {
  const RigidTransform truth = RigidTransform::FromPlanar(30.0, 7.5, -0.1, 0.5);
  const RigidTransform guess =
      truth * RigidTransform::FromPlanar(0.3, -0.2, DegToRad(5.0));
  const NdtResult r = NdtAlign(MineGrid(), ScanAt(truth), guess, NdtParams{});
  ASSERT_GE(r.score_history.size(), 2u);
  for (std::size_t i = 1; i < r.score_history.size(); ++i) {
    EXPECT_GE(r.score_history[i], r.score_history[i - 1]);
  }
}

TEST(NdtAlign, RecoversFixedPerturbation) {
  const RigidTransform perturbation =
      RigidTransform::FromPlanar(0.3, -0.2, DegToRad(5.0));
  const std::vector<Pose2> poses = {
      {10.0, 8.0, 0.0}, {30.0, 7.5, 0.3}, {15.0, 20.0, 1.5}, {45.0, 28.0, 3.0}};
  for (const Pose2& p : poses) {
    const RigidTransform truth = MakeRobotState(testing::SharedMine().world, p,
                                                MotionLimits{})
                                     .true_pose;
    const NdtResult r =
        NdtAlign(MineGrid(), ScanAt(truth), truth * perturbation, NdtParams{});
    EXPECT_TRUE(r.converged) << p.x << "," << p.y;
    EXPECT_LE(TranslationDistance(r.pose, truth), 0.05) << p.x << "," << p.y;
    EXPECT_LE(RotationAngle(r.pose, truth), DegToRad(1.0)) << p.x << "," << p.y;
  }
}

TEST(NdtAlign, FarGuessLeavesCorrectionUntouched) {
  // Smooth straight corridor: 10 m along-axis is ambiguous.
  const WorldMap w = GenerateWorld(testing::StraightCorridorSpec(40.0, 3.0));
  const MotionLimits limits;
  const double cy = w.height_m() / 2.0;
  WorldSpec spec = testing::StraightCorridorSpec(40.0, 3.0);
  const PointCloud map =
      BuildPriorMap(w, SurveyPoses(spec), LidarConfig{}, limits);
  const NdtGrid grid = BuildNdtGrid(map, NdtParams{});
  const RigidTransform truth =
      MakeRobotState(w, Pose2(20.0, cy, 0.0), limits).true_pose;
  const PointCloud scan =
      DecimateScan(CastScan(w, truth, LidarConfig{}), NdtParams{});
  const RigidTransform guess = RigidTransform::Translation(10.0, 0.0, 0.0) * truth;
  const NdtResult r = NdtAlign(grid, scan, guess, NdtParams{});
  EXPECT_TRUE(r.pose.IsFinite());

  const CorrectionState before =
      InitialCorrection(guess, RigidTransform::Identity());
  const CorrectionState after =
      r.converged ? UpdateCorrection(before, r.pose, RigidTransform::Identity(),
                                     1.0, r.score)
                  : before;
  if (!r.converged) {
    EXPECT_EQ(MaxComponentDifference(after.map_from_odom, before.map_from_odom),
              0.0);
  }
}

TEST(Correction, PredictPoseFixtures) {
  const RigidTransform p = RigidTransform::FromPlanar(1, 2, 0.3);
  CorrectionState s;
  EXPECT_LE(MaxComponentDifference(PredictPose(s, p), p), 1e-12);
  s.map_from_odom = RigidTransform::Translation(5, 0, 0);
  EXPECT_LE(MaxComponentDifference(
                PredictPose(s, RigidTransform::Translation(1, 0, 0)),
                RigidTransform::Translation(6, 0, 0)),
            1e-12);
  s.map_from_odom = RigidTransform::Yaw(kPi / 2);
  const RigidTransform q = PredictPose(s, RigidTransform::Translation(1, 0, 0));
  EXPECT_LE((q.translation() - Eigen::Vector3d(0, 1, 0)).norm(), 1e-12);
  EXPECT_NEAR(q.Rpy().z(), kPi / 2, 1e-12);
}

TEST(Correction, UpdateFixtures) {
  CorrectionState s;
  s.map_from_odom = RigidTransform::FromPlanar(0.4, -0.1, 0.05);
  const RigidTransform odom = RigidTransform::FromPlanar(3, 1, 0.2);
  const CorrectionState fixed =
      UpdateCorrection(s, PredictPose(s, odom), odom, 1.0, 0.0);
  EXPECT_LE(MaxComponentDifference(fixed.map_from_odom, s.map_from_odom), 1e-9);

  const CorrectionState hand =
      UpdateCorrection(CorrectionState{}, RigidTransform::Translation(1.2, 0.1, 0),
                       RigidTransform::Translation(1, 0, 0), 1.0, 0.0);
  EXPECT_LE(MaxComponentDifference(hand.map_from_odom,
                                   RigidTransform::Translation(0.2, 0.1, 0)),
            1e-12);

  const RigidTransform r = RigidTransform::FromXyzRpy(1, 2, 3, 0.1, 0.2, 0.3);
  const CorrectionState direct =
      UpdateCorrection(CorrectionState{}, r, RigidTransform::Identity(), 1.0, 0.0);
  EXPECT_LE(MaxComponentDifference(direct.map_from_odom, r), 1e-12);
  EXPECT_TRUE(direct.converged);
  EXPECT_EQ(direct.stamp, 1.0);
}

TEST(Correction, PredictReproducesRefinedProperty) {
  std::mt19937_64 rng(17);
  CorrectionState s;
  for (int i = 0; i < 1000; ++i) {
    s.map_from_odom = testing::RandomTransform(rng);
    const RigidTransform refined = testing::RandomTransform(rng);
    const RigidTransform odom = testing::RandomTransform(rng);
    const CorrectionState next = UpdateCorrection(s, refined, odom, i, 0.0);
    EXPECT_LE(MaxComponentDifference(PredictPose(next, odom), refined), 1e-9);
  }
}

TEST(Correction, CorrectionCellLoadsLatest) {
  CorrectionCell cell(CorrectionState{});
  CorrectionState s;
  s.map_from_odom = RigidTransform::Translation(1, 0, 0);
  s.stamp = 2.0;
  cell.Store(s);
  EXPECT_EQ(cell.Load().stamp, 2.0);
  EXPECT_EQ(cell.Load().map_from_odom.translation().x(), 1.0);
}

std::vector<StampedPose> StraightOdometry(int n) {
  std::vector<StampedPose> odom;
  for (int i = 0; i < n; ++i) {
    odom.push_back({0.1 * i, RigidTransform::Translation(0.05 * i, 0, 0)});
  }
  return odom;
}

TEST(Correction, StreamWithConstantCorrection) {
  CorrectionState s;
  s.map_from_odom = RigidTransform::FromPlanar(2, 3, 0.4);
  const std::vector<StampedPose> odom = StraightOdometry(20);
  const std::vector<StampedPose> out = CorrectedPoseStream(s, {}, odom);
  ASSERT_EQ(out.size(), odom.size());
  for (std::size_t i = 0; i < odom.size(); ++i) {
    EXPECT_EQ(out[i].stamp, odom[i].stamp);
    EXPECT_LE(MaxComponentDifference(out[i].pose, s.map_from_odom * odom[i].pose),
              1e-12);
  }
}

TEST(Correction, StreamWithMidStreamUpdate) {
  CorrectionState a;
  a.map_from_odom = RigidTransform::FromPlanar(1, 0, 0.1);
  CorrectionState b;
  b.map_from_odom = RigidTransform::FromPlanar(1.2, 0.1, 0.12);
  const std::vector<StampedPose> odom = StraightOdometry(20);
  const std::vector<StampedPose> out =
      CorrectedPoseStream(a, {{1.0, b}}, odom);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_TRUE(out[i].pose.IsFinite());
    const CorrectionState& prev = odom[i - 1].stamp >= 1.0 - 1e-12 ? b : a;
    const CorrectionState& cur = odom[i].stamp >= 1.0 - 1e-12 ? b : a;
    // Consecutive outputs differ by the correction delta composed with the
    // odometry increment.
    const RigidTransform delta = cur.map_from_odom * prev.map_from_odom.Inverse();
    const RigidTransform expected =
        delta * out[i - 1].pose * (odom[i - 1].pose.Inverse() * odom[i].pose);
    EXPECT_LE(MaxComponentDifference(out[i].pose, expected), 1e-9);
  }
}

TEST(Correction, StreamJumpWithoutMotion) {
  CorrectionState a;
  CorrectionState b;
  b.map_from_odom = RigidTransform::FromPlanar(0.3, -0.2, 0.05);
  const RigidTransform p = RigidTransform::FromPlanar(4, 5, 0.6);
  const std::vector<StampedPose> odom = {{0.0, p}, {0.1, p}, {0.2, p}};
  CorrectionState c;
  c.map_from_odom = RigidTransform::FromPlanar(0.5, 0.1, -0.02);
  const std::vector<StampedPose> out =
      CorrectedPoseStream(a, {{0.1, b}, {0.2, c}}, odom);
  EXPECT_LE(MaxComponentDifference(out[1].pose * out[0].pose.Inverse(),
                                   b.map_from_odom * a.map_from_odom.Inverse()),
            1e-12);
  EXPECT_LE(MaxComponentDifference(out[2].pose * out[1].pose.Inverse(),
                                   c.map_from_odom * b.map_from_odom.Inverse()),
            1e-12);
}

}  // namespace
}  // namespace minenav
