#pragma once

#include <limits>
#include <vector>

#include "minenav/geometry.hpp"

namespace minenav {

struct CeilingParams {
  double z_max = 1.5;  // m, body frame; points at exactly z_max are kept
};

struct PmfParams {
  double cell_size = 0.25;
  int initial_window = 1;
  int max_window = 16;
  double slope = 0.3;
  double initial_distance = 0.025;
  double max_distance = 0.5;
  // Cells with no returns take the lowest return within fill_radius (m).
  // With a finite support_z they are further capped by the support plane
  // support_z + support_grade * r, r the horizontal distance to the sensor.
  // Unfilled cells stay unobserved.
  double fill_radius = 2.0;
  double support_z = std::numeric_limits<double>::quiet_NaN();
  double support_grade = 0.01;

  void Validate() const;
  // Window sizes (cells) 2^k * initial_window + 1, k = 1, 2, ... while they
  // fit within max_window.
  std::vector<int> WindowSizes() const;
  // Elevation threshold for each window.
  std::vector<double> Thresholds() const;
};

PointCloud CeilingFilter(const PointCloud& cloud, const CeilingParams& params);

// Approximate progressive morphological filter on the min-z raster. Writes
// kGroundLabel / kObstacleLabel into each point's intensity; order and
// coordinates are preserved.
PointCloud PmfSegment(const PointCloud& cloud, const PmfParams& params);

// Ceiling filter followed by the PMF.
PointCloud SegmentTerrain(const PointCloud& body_cloud,
                          const CeilingParams& ceiling, const PmfParams& pmf);

}  // namespace minenav
