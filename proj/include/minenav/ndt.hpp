#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "minenav/geometry.hpp"

namespace minenav {

class NdtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NdtParams {
  double voxel_size = 1.0;
  int max_iterations = 30;
  // Converged once translation + 0.5 * rotation of an accepted step is below
  // this (m + rad).
  double epsilon = 1e-3;
  int max_step_halvings = 4;
  // Newton steps are limited to these magnitudes before the line search.
  double max_translation_step = 0.3;
  double max_rotation_step = 0.1;
  int min_points_per_voxel = 5;
  // Eigenvalue floor: max(eigen_ratio * largest, min_eigenvalue).
  double eigen_ratio = 1e-3;
  double min_eigenvalue = 1e-2;
  // Scan decimation before alignment.
  double scan_voxel_size = 0.5;
  int max_scan_points = 2000;
  // A converged alignment also needs this mean per-point score.
  double min_mean_score = 0.25;
  // Each point is scored against the (2r+1)^3 voxels around its own; 0 uses
  // only the containing voxel.
  int neighbor_radius = 1;

  void Validate() const;
};

struct NdtVoxel {
  int count = 0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d information = Eigen::Matrix3d::Identity();
};

// Gaussian voxel model of a reference cloud on a dense, axis-aligned lattice.
class NdtGrid {
 public:
  NdtGrid() = default;

  double voxel_size() const { return voxel_size_; }
  bool empty() const { return voxels_.empty(); }
  std::size_t size() const { return voxels_.size(); }
  const std::vector<NdtVoxel>& voxels() const { return voxels_; }

  // Voxel containing p, or nullptr.
  const NdtVoxel* Find(const Eigen::Vector3d& p) const;
  // Voxels in the (2r+1)^3 block around the one containing p.
  void Neighbors(const Eigen::Vector3d& p, int radius,
                 std::vector<const NdtVoxel*>* out) const;

 private:
  friend NdtGrid BuildNdtGrid(const PointCloud&, const NdtParams&);

  int Lookup(int ix, int iy, int iz) const;

  double voxel_size_ = 1.0;
  Eigen::Vector3i origin_ = Eigen::Vector3i::Zero();
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  std::vector<int> lattice_;
  std::vector<NdtVoxel> voxels_;
};

NdtGrid BuildNdtGrid(const PointCloud& map_cloud, const NdtParams& params);

// Clamps a symmetric covariance's spectrum from below.
Eigen::Matrix3d RegularizeCovariance(const Eigen::Matrix3d& covariance,
                                     double eigen_ratio, double min_eigenvalue);

struct NdtResult {
  RigidTransform pose;
  double score = 0.0;
  double mean_score = 0.0;
  bool converged = false;
  int iterations = 0;
  // Score after each accepted step, starting with the initial guess.
  std::vector<double> score_history;
};

// Voxel filter plus uniform stride so at most max_scan_points remain.
PointCloud DecimateScan(const PointCloud& scan, const NdtParams& params);

// Score sum_p exp(-0.5 * d^T Sigma^-1 d) of the transformed scan over the
// voxel neighbourhood of each point.
double NdtScore(const NdtGrid& grid, const PointCloud& scan,
                const RigidTransform& pose, int neighbor_radius = 1);

// Damped Newton maximisation of NdtScore over (x, y, z, roll, pitch, yaw)
// with step halving. `scan` is used as given (decimate first if needed).
NdtResult NdtAlign(const NdtGrid& grid, const PointCloud& scan,
                   const RigidTransform& initial_guess,
                   const NdtParams& params);

}  // namespace minenav
