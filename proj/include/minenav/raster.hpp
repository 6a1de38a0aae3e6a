#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "minenav/geometry.hpp"

namespace minenav {

class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlannerParams {
  double robot_radius = 1.0;
  double resolution = 0.05;
  double sensor_range = 30.0;
  double replan_rate_hz = 2.5;
  // New obstacle cells closer than this to known ones are treated as
  // re-observations and not merged.
  double merge_tolerance = 0.25;
  // Scans a new cell must appear in before it is merged.
  int min_observations = 1;

  void Validate() const;
  double SimplifyTolerance() const { return 2.0 * resolution; }
  // Raster dilation radius: clearance plus simplification and cell slack.
  double InflationRadius() const {
    return robot_radius + SimplifyTolerance() + resolution;
  }
};

struct CellXY {
  int ix = 0;
  int iy = 0;
};

// Binary bird's-eye image. Cell (ix, iy) covers
// [origin + (ix, iy) * res, origin + (ix + 1, iy + 1) * res).
class OccupancyImage {
 public:
  OccupancyImage() = default;
  OccupancyImage(const Eigen::Vector2d& origin, double resolution, int width,
                 int height);

  const Eigen::Vector2d& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  bool InBounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  std::size_t Index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width_ + ix;
  }
  CellXY CellOf(double x, double y) const;
  Eigen::Vector2d CellCenter(int ix, int iy) const;
  Eigen::Vector2d Corner(int ix, int iy) const;

  // Out-of-bounds cells read as free.
  bool Occupied(int ix, int iy) const {
    return InBounds(ix, iy) && cells_[Index(ix, iy)] != 0;
  }
  void Set(int ix, int iy, bool occupied);
  std::size_t CountOccupied() const;
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  std::vector<std::uint8_t>& mutable_cells() { return cells_; }

  // Re-allocates (keeping content and lattice alignment) so that the box
  // [lo, hi] is covered.
  void EnsureCovers(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);

 private:
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  double resolution_ = 0.05;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Marks every cell holding at least one obstacle-labelled point. The image
// spans the obstacle points' bounding box; no obstacle points gives an
// empty image.
OccupancyImage RasterizeObstacles(const PointCloud& cloud,
                                  const PlannerParams& params);

// Cells whose centre lies within `radius` of an occupied cell's centre.
OccupancyImage DilateImage(const OccupancyImage& image, double radius);

// Distance from (x, y) to the nearest occupied cell centre, or +inf.
double DistanceToOccupied(const OccupancyImage& image, double x, double y,
                          double max_radius);

}  // namespace minenav
