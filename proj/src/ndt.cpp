#include "minenav/ndt.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace minenav {

void NdtParams::Validate() const {
  if (max_iterations < 1) throw NdtError("max iterations must be >= 1");
  if (!(voxel_size > 0.0)) throw NdtError("voxel size must be > 0");
  if (min_points_per_voxel < 1) throw NdtError("min points must be >= 1");
  if (neighbor_radius < 0) throw NdtError("neighbour radius must be >= 0");
}

int NdtGrid::Lookup(int ix, int iy, int iz) const {
  ix -= origin_.x();
  iy -= origin_.y();
  iz -= origin_.z();
  if (ix < 0 || iy < 0 || iz < 0 || ix >= dims_.x() || iy >= dims_.y() ||
      iz >= dims_.z()) {
    return -1;
  }
  return lattice_[(static_cast<std::size_t>(iz) * dims_.y() + iy) * dims_.x() +
                  ix];
}

const NdtVoxel* NdtGrid::Find(const Eigen::Vector3d& p) const {
  const double inv = 1.0 / voxel_size_;
  const int i = Lookup(static_cast<int>(std::floor(p.x() * inv)),
                       static_cast<int>(std::floor(p.y() * inv)),
                       static_cast<int>(std::floor(p.z() * inv)));
  return i < 0 ? nullptr : &voxels_[i];
}

void NdtGrid::Neighbors(const Eigen::Vector3d& p, int radius,
                        std::vector<const NdtVoxel*>* out) const {
  out->clear();
  const double inv = 1.0 / voxel_size_;
  const int cx = static_cast<int>(std::floor(p.x() * inv));
  const int cy = static_cast<int>(std::floor(p.y() * inv));
  const int cz = static_cast<int>(std::floor(p.z() * inv));
  for (int dz = -radius; dz <= radius; ++dz) {
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        const int i = Lookup(cx + dx, cy + dy, cz + dz);
        if (i >= 0) out->push_back(&voxels_[i]);
      }
    }
  }
}

Eigen::Matrix3d RegularizeCovariance(const Eigen::Matrix3d& covariance,
                                     double eigen_ratio,
                                     double min_eigenvalue) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(covariance);
  Eigen::Vector3d values = solver.eigenvalues();
  const double largest = std::max(values.maxCoeff(), 0.0);
  const double floor = std::max(eigen_ratio * largest, min_eigenvalue);
  for (int i = 0; i < 3; ++i) values[i] = std::max(values[i], floor);
  const Eigen::Matrix3d& v = solver.eigenvectors();
  Eigen::Matrix3d out = v * values.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

NdtGrid BuildNdtGrid(const PointCloud& map_cloud, const NdtParams& params) {
  params.Validate();
  if (map_cloud.empty()) throw NdtError("cannot build NDT grid: empty cloud");

  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    int count = 0;
    Eigen::Vector3i key;
  };
  const double inv = 1.0 / params.voxel_size;
  std::vector<Accum> accums;
  std::unordered_map<long long, std::size_t> index;
  Eigen::Vector3i lo = Eigen::Vector3i::Constant(std::numeric_limits<int>::max());
  Eigen::Vector3i hi = Eigen::Vector3i::Constant(std::numeric_limits<int>::min());
  for (const Point& p : map_cloud.points) {
    const Eigen::Vector3i key(static_cast<int>(std::floor(p.x * inv)),
                              static_cast<int>(std::floor(p.y * inv)),
                              static_cast<int>(std::floor(p.z * inv)));
    const long long h = (static_cast<long long>(key.x()) + (1 << 20)) * (1LL << 42) +
                        (static_cast<long long>(key.y()) + (1 << 20)) * (1LL << 21) +
                        (static_cast<long long>(key.z()) + (1 << 20));
    auto [it, inserted] = index.try_emplace(h, accums.size());
    if (inserted) {
      accums.emplace_back();
      accums.back().key = key;
    }
    Accum& a = accums[it->second];
    const Eigen::Vector3d v = p.position();
    a.sum += v;
    a.outer += v * v.transpose();
    ++a.count;
    lo = lo.cwiseMin(key);
    hi = hi.cwiseMax(key);
  }

  NdtGrid grid;
  grid.voxel_size_ = params.voxel_size;
  grid.origin_ = lo;
  grid.dims_ = hi - lo + Eigen::Vector3i::Ones();
  grid.lattice_.assign(static_cast<std::size_t>(grid.dims_.x()) *
                           grid.dims_.y() * grid.dims_.z(),
                       -1);
  for (const Accum& a : accums) {
    if (a.count < params.min_points_per_voxel) continue;
    NdtVoxel voxel;
    voxel.count = a.count;
    voxel.mean = a.sum / a.count;
    Eigen::Matrix3d cov =
        (a.outer - a.count * voxel.mean * voxel.mean.transpose()) /
        (a.count - 1);
    cov = 0.5 * (cov + cov.transpose());
    voxel.covariance = RegularizeCovariance(cov, params.eigen_ratio,
                                            params.min_eigenvalue);
    voxel.information = voxel.covariance.inverse();
    const Eigen::Vector3i rel = a.key - lo;
    grid.lattice_[(static_cast<std::size_t>(rel.z()) * grid.dims_.y() +
                   rel.y()) *
                      grid.dims_.x() +
                  rel.x()] = static_cast<int>(grid.voxels_.size());
    grid.voxels_.push_back(voxel);
  }
  if (grid.voxels_.empty()) {
    throw NdtError("cannot build NDT grid: no voxel reached the point minimum");
  }
  return grid;
}

PointCloud DecimateScan(const PointCloud& scan, const NdtParams& params) {
  PointCloud out = VoxelDownsample(scan, params.scan_voxel_size);
  if (static_cast<int>(out.size()) <= params.max_scan_points) return out;
  PointCloud strided;
  strided.frame_id = out.frame_id;
  strided.stamp = out.stamp;
  const double stride =
      static_cast<double>(out.size()) / params.max_scan_points;
  for (int i = 0; i < params.max_scan_points; ++i) {
    strided.points.push_back(
        out.points[static_cast<std::size_t>(std::floor(i * stride))]);
  }
  return strided;
}

namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Points whose Mahalanobis distance squared exceeds this add nothing useful.
constexpr double kMahalanobisCutoff = 40.0;

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

RigidTransform FromParams(const Vector6d& x) {
  return RigidTransform::FromXyzRpy(x[0], x[1], x[2], x[3], x[4], x[5]);
}

Vector6d ToParams(const RigidTransform& t) {
  const Eigen::Vector3d rpy = t.Rpy();
  Vector6d x;
  x << t.translation(), rpy;
  return x;
}

// Score, gradient and Hessian of the NDT objective at parameters x. The
// transform is T = Trans(x, y, z) * Rz(yaw) * Ry(pitch) * Rx(roll).
double Evaluate(const NdtGrid& grid, const std::vector<Eigen::Vector3d>& pts,
                int radius, const Vector6d& x, Vector6d* gradient,
                Matrix6d* hessian) {
  const Eigen::Matrix3d rx =
      Eigen::AngleAxisd(x[3], Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d ry =
      Eigen::AngleAxisd(x[4], Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d rz =
      Eigen::AngleAxisd(x[5], Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d kx = Skew(Eigen::Vector3d::UnitX());
  const Eigen::Matrix3d ky = Skew(Eigen::Vector3d::UnitY());
  const Eigen::Matrix3d kz = Skew(Eigen::Vector3d::UnitZ());
  const Eigen::Matrix3d rzy = rz * ry;
  const Eigen::Vector3d t = x.head<3>();
  const bool derivs = gradient != nullptr;
  if (derivs) {
    gradient->setZero();
    hessian->setZero();
  }

  double score = 0.0;
  std::vector<const NdtVoxel*> neighbors;
  neighbors.reserve(27);
  Eigen::Matrix<double, 3, 6> jac;
  jac.leftCols<3>().setIdentity();
  // Second derivatives of R*p for the rotational pairs, indexed by
  // (roll, pitch, yaw) = (0, 1, 2).
  Eigen::Vector3d second[3][3];

  for (const Eigen::Vector3d& p : pts) {
    const Eigen::Vector3d q0 = rx * p;
    const Eigen::Vector3d q1 = ry * q0;
    const Eigen::Vector3d world = rz * q1 + t;
    grid.Neighbors(world, radius, &neighbors);
    if (neighbors.empty()) continue;

    if (derivs) {
      jac.col(3) = rzy * (kx * q0);
      jac.col(4) = rzy * (ky * q0);
      jac.col(5) = rz * (kz * q1);
      second[0][0] = rzy * (kx * (kx * q0));
      second[0][1] = rzy * (ky * (kx * q0));
      second[0][2] = rz * (kz * (ry * (kx * q0)));
      second[1][1] = rzy * (ky * (ky * q0));
      second[1][2] = rz * (kz * (ry * (ky * q0)));
      second[2][2] = rz * (kz * (kz * q1));
      second[1][0] = second[0][1];
      second[2][0] = second[0][2];
      second[2][1] = second[1][2];
    }

    for (const NdtVoxel* v : neighbors) {
      const Eigen::Vector3d d = world - v->mean;
      const Eigen::Vector3d cd = v->information * d;
      const double m = d.dot(cd);
      if (m > kMahalanobisCutoff) continue;
      const double s = std::exp(-0.5 * m);
      score += s;
      if (!derivs) continue;
      // f = -m/2, df/dx_i = -cd^T J_i.
      const Vector6d df = -(jac.transpose() * cd);
      *gradient += s * df;
      const Eigen::Matrix<double, 3, 6> cj = v->information * jac;
      Matrix6d d2f = -(jac.transpose() * cj);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          d2f(3 + i, 3 + j) -= cd.dot(second[i][j]);
        }
      }
      *hessian += s * (df * df.transpose() + d2f);
    }
  }
  return score;
}

double StepNorm(const Vector6d& step) {
  return step.head<3>().norm() + 0.5 * step.tail<3>().norm();
}

}  // namespace

double NdtScore(const NdtGrid& grid, const PointCloud& scan,
                const RigidTransform& pose, int neighbor_radius) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(scan.size());
  for (const Point& p : scan.points) pts.push_back(p.position());
  return Evaluate(grid, pts, neighbor_radius, ToParams(pose), nullptr, nullptr);
}

NdtResult NdtAlign(const NdtGrid& grid, const PointCloud& scan,
                   const RigidTransform& initial_guess,
                   const NdtParams& params) {
  params.Validate();
  if (grid.empty()) throw NdtError("NDT grid is empty");
  if (!initial_guess.IsFinite()) throw NdtError("initial guess is not finite");

  std::vector<Eigen::Vector3d> pts;
  pts.reserve(scan.size());
  for (const Point& p : scan.points) pts.push_back(p.position());

  NdtResult result;
  Vector6d x = ToParams(initial_guess);
  Vector6d gradient;
  Matrix6d hessian;
  double score = Evaluate(grid, pts, params.neighbor_radius, x, &gradient, &hessian);
  result.score_history.push_back(score);

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    result.iterations = iter;
    // Newton step on the negated Hessian with its spectrum made positive.
    Eigen::SelfAdjointEigenSolver<Matrix6d> solver(-hessian);
    Vector6d values = solver.eigenvalues().cwiseAbs();
    const double top = values.maxCoeff();
    if (!(top > 0.0)) break;
    for (int i = 0; i < 6; ++i) values[i] = std::max(values[i], 1e-6 * top);
    const Matrix6d& vecs = solver.eigenvectors();
    Vector6d step =
        vecs * (vecs.transpose() * gradient).cwiseQuotient(values);

    const double tn = step.head<3>().norm();
    const double rn = step.tail<3>().norm();
    double scale = 1.0;
    if (tn > params.max_translation_step) {
      scale = std::min(scale, params.max_translation_step / tn);
    }
    if (rn > params.max_rotation_step) {
      scale = std::min(scale, params.max_rotation_step / rn);
    }
    step *= scale;

    bool accepted = false;
    for (int h = 0; h <= params.max_step_halvings; ++h) {
      const Vector6d candidate = x + step;
      Vector6d g;
      Matrix6d hs;
      const double s = Evaluate(grid, pts, params.neighbor_radius, candidate, &g, &hs);
      if (s >= score) {
        x = candidate;
        score = s;
        gradient = g;
        hessian = hs;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent along the Newton direction: the guess is a local optimum
      // up to the resolution of the final halved step.
      result.converged = StepNorm(step) < params.epsilon;
      break;
    }
    result.score_history.push_back(score);
    if (StepNorm(step) < params.epsilon) {
      result.converged = true;
      break;
    }
  }

  result.pose = FromParams(x);
  result.score = score;
  result.mean_score = pts.empty() ? 0.0 : score / static_cast<double>(pts.size());
  if (result.mean_score < params.min_mean_score) result.converged = false;
  return result;
}

}  // namespace minenav
