#include "minenav/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace minenav {

void PmfParams::Validate() const {
  if (initial_window < 1) throw std::invalid_argument("PMF: w0 must be >= 1");
  if (!(initial_distance < max_distance)) {
    throw std::invalid_argument("PMF: dh0 must be < dh_max");
  }
  if (slope < 0.0) throw std::invalid_argument("PMF: slope must be >= 0");
  if (!(cell_size > 0.0)) throw std::invalid_argument("PMF: cell size > 0");
  if (fill_radius < 0.0) throw std::invalid_argument("PMF: fill radius >= 0");
}

std::vector<int> PmfParams::WindowSizes() const {
  std::vector<int> sizes;
  for (int k = 1;; ++k) {
    const long long w = (1LL << k) * initial_window + 1;
    if (w > max_window) break;
    sizes.push_back(static_cast<int>(w));
  }
  return sizes;
}

std::vector<double> PmfParams::Thresholds() const {
  const std::vector<int> sizes = WindowSizes();
  std::vector<double> out;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (k == 0) {
      out.push_back(initial_distance);
    } else {
      out.push_back(std::min(
          slope * (sizes[k] - sizes[k - 1]) * cell_size + initial_distance,
          max_distance));
    }
  }
  return out;
}

PointCloud CeilingFilter(const PointCloud& cloud, const CeilingParams& params) {
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.stamp = cloud.stamp;
  out.points.reserve(cloud.size());
  for (const Point& p : cloud.points) {
    if (p.z <= params.z_max) out.points.push_back(p);
  }
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Separable square-window min (erode) or max (dilate) over observed cells.
// Unobserved cells never contribute; they stay NaN unless all_cells is set.
std::vector<double> Morph(const std::vector<double>& in, int nx, int ny,
                          int window, bool erode, bool all_cells = false) {
  const int half = window / 2;
  const double fill = erode ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
  auto better = [erode](double a, double b) {
    return erode ? std::min(a, b) : std::max(a, b);
  };
  std::vector<double> rows(in.size(), fill);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double acc = fill;
      for (int k = std::max(0, ix - half); k <= std::min(nx - 1, ix + half);
           ++k) {
        const double v = in[static_cast<std::size_t>(iy) * nx + k];
        if (!std::isnan(v)) acc = better(acc, v);
      }
      rows[static_cast<std::size_t>(iy) * nx + ix] = acc;
    }
  }
  std::vector<double> out(in.size(), kNaN);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (!all_cells && std::isnan(in[i])) continue;
      double acc = fill;
      for (int k = std::max(0, iy - half); k <= std::min(ny - 1, iy + half);
           ++k) {
        acc = better(acc, rows[static_cast<std::size_t>(k) * nx + ix]);
      }
      if (std::isfinite(acc)) out[i] = acc;
    }
  }
  return out;
}

}  // namespace

PointCloud PmfSegment(const PointCloud& cloud, const PmfParams& params) {
  params.Validate();
  PointCloud out = cloud;
  if (cloud.empty()) return out;

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point& p : cloud.points) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double c = params.cell_size;
  if (std::isfinite(params.support_z) || params.fill_radius > 0.0) {
    const double pad = (params.max_window / 2 + 1) * c;
    min_x -= pad;
    min_y -= pad;
    max_x += pad;
    max_y += pad;
  }
  const int nx = static_cast<int>(std::floor((max_x - min_x) / c)) + 1;
  const int ny = static_cast<int>(std::floor((max_y - min_y) / c)) + 1;

  std::vector<std::size_t> cell_of(cloud.size());
  std::vector<double> surface(static_cast<std::size_t>(nx) * ny, kNaN);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    const int ix = std::min(nx - 1, static_cast<int>((p.x - min_x) / c));
    const int iy = std::min(ny - 1, static_cast<int>((p.y - min_y) / c));
    const std::size_t cell = static_cast<std::size_t>(iy) * nx + ix;
    cell_of[i] = cell;
    if (std::isnan(surface[cell]) || p.z < surface[cell]) surface[cell] = p.z;
  }

  std::vector<double> low;
  if (params.fill_radius > 0.0) {
    const int w = 2 * static_cast<int>(std::ceil(params.fill_radius / c)) + 1;
    low = Morph(surface, nx, ny, w, true, true);
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      if (!std::isnan(surface[i])) continue;
      double v = low.empty() ? kNaN : low[i];
      if (std::isfinite(params.support_z)) {
        const double r =
            std::hypot(min_x + (ix + 0.5) * c, min_y + (iy + 0.5) * c);
        const double prior = params.support_z + params.support_grade * r;
        v = std::isnan(v) ? prior : std::min(v, prior);
      }
      surface[i] = v;
    }
  }

  for (Point& p : out.points) p.intensity = kGroundLabel;
  const std::vector<int> windows = params.WindowSizes();
  const std::vector<double> thresholds = params.Thresholds();
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const std::vector<double> eroded = Morph(surface, nx, ny, windows[k], true);
    const std::vector<double> opened = Morph(eroded, nx, ny, windows[k], false);
    for (std::size_t i = 0; i < out.size(); ++i) {
      Point& p = out.points[i];
      if (p.intensity != kGroundLabel) continue;
      if (p.z - opened[cell_of[i]] > thresholds[k]) p.intensity = kObstacleLabel;
    }
    surface = opened;
  }
  return out;
}

PointCloud SegmentTerrain(const PointCloud& body_cloud,
                          const CeilingParams& ceiling, const PmfParams& pmf) {
  PointCloud filtered = CeilingFilter(body_cloud, ceiling);
  if (filtered.empty()) return filtered;
  return PmfSegment(filtered, pmf);
}

}  // namespace minenav
