#include "minenav/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minenav {

void PlannerParams::Validate() const {
  if (!(robot_radius > 0.0)) throw PlannerError("robot radius must be > 0");
  if (!(resolution > 0.0)) throw PlannerError("resolution must be > 0");
  if (!(sensor_range > 0.0)) throw PlannerError("sensor range must be > 0");
  if (merge_tolerance < 0.0) throw PlannerError("merge tolerance must be >= 0");
  if (min_observations < 1) throw PlannerError("min observations must be >= 1");
}

OccupancyImage::OccupancyImage(const Eigen::Vector2d& origin,
                               double resolution, int width, int height)
    : origin_(origin),
      resolution_(resolution),
      width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * height, 0) {
  if (!(resolution > 0.0) || width < 0 || height < 0) {
    throw PlannerError("invalid occupancy image shape");
  }
}

CellXY OccupancyImage::CellOf(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_.x()) / resolution_)),
          static_cast<int>(std::floor((y - origin_.y()) / resolution_))};
}

Eigen::Vector2d OccupancyImage::CellCenter(int ix, int iy) const {
  return origin_ + Eigen::Vector2d(ix + 0.5, iy + 0.5) * resolution_;
}

Eigen::Vector2d OccupancyImage::Corner(int ix, int iy) const {
  return origin_ + Eigen::Vector2d(ix, iy) * resolution_;
}

void OccupancyImage::Set(int ix, int iy, bool occupied) {
  if (!InBounds(ix, iy)) throw PlannerError("cell out of image bounds");
  cells_[Index(ix, iy)] = occupied ? 1 : 0;
}

std::size_t OccupancyImage::CountOccupied() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(),
                    [](std::uint8_t c) { return c != 0; }));
}

void OccupancyImage::EnsureCovers(const Eigen::Vector2d& lo,
                                  const Eigen::Vector2d& hi) {
  if (empty()) {
    const int w = static_cast<int>(std::floor((hi.x() - lo.x()) / resolution_)) + 1;
    const int h = static_cast<int>(std::floor((hi.y() - lo.y()) / resolution_)) + 1;
    *this = OccupancyImage(lo, resolution_, w, h);
    return;
  }
  const CellXY a = CellOf(lo.x(), lo.y());
  const CellXY b = CellOf(hi.x(), hi.y());
  const int x0 = std::min(0, a.ix);
  const int y0 = std::min(0, a.iy);
  const int x1 = std::max(width_ - 1, b.ix);
  const int y1 = std::max(height_ - 1, b.iy);
  if (x0 == 0 && y0 == 0 && x1 == width_ - 1 && y1 == height_ - 1) return;
  OccupancyImage grown(Corner(x0, y0), resolution_, x1 - x0 + 1, y1 - y0 + 1);
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      if (cells_[Index(ix, iy)]) grown.Set(ix - x0, iy - y0, true);
    }
  }
  *this = std::move(grown);
}

OccupancyImage RasterizeObstacles(const PointCloud& cloud,
                                  const PlannerParams& params) {
  params.Validate();
  Eigen::Vector2d lo(std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  bool any = false;
  for (const Point& p : cloud.points) {
    if (p.intensity != kObstacleLabel) continue;
    lo = lo.cwiseMin(Eigen::Vector2d(p.x, p.y));
    hi = hi.cwiseMax(Eigen::Vector2d(p.x, p.y));
    any = true;
  }
  if (!any) return OccupancyImage({0.0, 0.0}, params.resolution, 0, 0);
  // Snap the origin to the global lattice so images from different clouds
  // line up.
  const double res = params.resolution;
  const Eigen::Vector2d origin((std::floor(lo.x() / res)) * res,
                               (std::floor(lo.y() / res)) * res);
  const int w = static_cast<int>(std::floor((hi.x() - origin.x()) / res)) + 1;
  const int h = static_cast<int>(std::floor((hi.y() - origin.y()) / res)) + 1;
  OccupancyImage image(origin, res, w, h);
  for (const Point& p : cloud.points) {
    if (p.intensity != kObstacleLabel) continue;
    const CellXY c = image.CellOf(p.x, p.y);
    image.Set(std::clamp(c.ix, 0, w - 1), std::clamp(c.iy, 0, h - 1), true);
  }
  return image;
}

OccupancyImage DilateImage(const OccupancyImage& image, double radius) {
  if (image.empty()) return image;
  const int r = static_cast<int>(std::floor(radius / image.resolution()));
  const double r2 = std::pow(radius / image.resolution(), 2);
  // Grow the frame so the dilated blobs fit.
  OccupancyImage out(image.Corner(-r - 1, -r - 1), image.resolution(),
                     image.width() + 2 * r + 2, image.height() + 2 * r + 2);
  std::vector<int> span(2 * r + 1);
  for (int dy = -r; dy <= r; ++dy) {
    span[dy + r] = static_cast<int>(std::floor(std::sqrt(r2 - dy * dy)));
  }
  const int shift = r + 1;
  std::vector<std::uint8_t>& dst = out.mutable_cells();
  for (int iy = 0; iy < image.height(); ++iy) {
    for (int ix = 0; ix < image.width(); ++ix) {
      if (!image.Occupied(ix, iy)) continue;
      for (int dy = -r; dy <= r; ++dy) {
        const int s = span[dy + r];
        const std::size_t row = out.Index(0, iy + dy + shift);
        std::fill(dst.begin() + row + ix - s + shift,
                  dst.begin() + row + ix + s + shift + 1, 1);
      }
    }
  }
  return out;
}

double DistanceToOccupied(const OccupancyImage& image, double x, double y,
                          double max_radius) {
  double best = std::numeric_limits<double>::infinity();
  if (image.empty()) return best;
  const CellXY c = image.CellOf(x, y);
  const int r = static_cast<int>(std::ceil(max_radius / image.resolution())) + 1;
  for (int iy = std::max(0, c.iy - r); iy <= std::min(image.height() - 1, c.iy + r);
       ++iy) {
    for (int ix = std::max(0, c.ix - r);
         ix <= std::min(image.width() - 1, c.ix + r); ++ix) {
      if (!image.Occupied(ix, iy)) continue;
      best = std::min(best, (image.CellCenter(ix, iy) - Eigen::Vector2d(x, y)).norm());
    }
  }
  return best <= max_radius ? best : std::numeric_limits<double>::infinity();
}

}  // namespace minenav
