#pragma once

#include <vector>

#include <Eigen/Core>

namespace minenav {

// Closed polygon; the last vertex connects back to the first. Outer borders
// are counter-clockwise. Hole borders (free space enclosed by obstacle) run
// clockwise, so the obstacle is always on the left of each edge.
struct ObstaclePolygon {
  std::vector<Eigen::Vector2d> vertices;
  bool inflated = false;
  bool hole = false;
};

double SignedArea(const std::vector<Eigen::Vector2d>& ring);
Eigen::Vector2d Centroid(const std::vector<Eigen::Vector2d>& ring);
bool IsConvex(const std::vector<Eigen::Vector2d>& ring);
// No two non-adjacent edges touch and no adjacent edges overlap.
bool IsSimple(const std::vector<Eigen::Vector2d>& ring);

// Douglas-Peucker on a closed ring. Falls back to the input when the result
// would have fewer than three vertices or self-intersect.
std::vector<Eigen::Vector2d> SimplifyRing(
    const std::vector<Eigen::Vector2d>& ring, double tolerance);

// Drops vertices where the boundary continues straight.
std::vector<Eigen::Vector2d> RemoveCollinear(
    const std::vector<Eigen::Vector2d>& ring, double eps = 1e-12);

// Outward offset of a simple CCW polygon by `radius`. Convex polygons get
// exact offset edges with each corner arc replaced by at most 8 chords that
// stay outside the arc. Non-convex polygons are offset on a raster of cell
// size `resolution`. Polygons with area below resolution^2 become an
// octagon with apothem `radius` around their centroid.
ObstaclePolygon Inflate(const ObstaclePolygon& polygon, double radius,
                        double resolution = 0.05);

}  // namespace minenav
