#pragma once

#include <vector>

#include "minenav/polygon.hpp"
#include "minenav/raster.hpp"

namespace minenav {

// Follows the cell-edge boundary of every occupied region. Diagonally
// touching cells belong to the same region. Outer borders come out
// counter-clockwise and hole borders clockwise, with corners on the cell
// lattice and collinear vertices removed.
std::vector<ObstaclePolygon> TraceContours(const OccupancyImage& image);

// TraceContours followed by Douglas-Peucker at `tolerance` (2 * resolution
// when negative). Holes are dropped unless `keep_holes` is set.
std::vector<ObstaclePolygon> ExtractContours(const OccupancyImage& image,
                                             double tolerance = -1.0,
                                             bool keep_holes = true);

}  // namespace minenav
