#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "minenav/geometry.hpp"
#include "minenav/polygon.hpp"
#include "minenav/raster.hpp"

namespace minenav {

// Union of polygon interiors under the nonzero winding rule, with a uniform
// grid over the edges for segment queries.
class ObstacleIndex {
 public:
  explicit ObstacleIndex(const std::vector<ObstaclePolygon>& polygons,
                         double cell_size = 1.0);

  bool empty() const { return edges_.empty(); }
  // Strictly inside an obstacle (boundary points are free).
  bool Interior(const Eigen::Vector2d& p) const;
  bool OnBoundary(const Eigen::Vector2d& p) const;
  // The open segment avoids every interior. Grazing contact is allowed.
  bool SegmentVisible(const Eigen::Vector2d& p, const Eigen::Vector2d& q) const;

 private:
  struct Edge {
    Eigen::Vector2d a;
    Eigen::Vector2d b;
  };
  int Col(double x) const;
  int Row(double y) const;
  const std::vector<int>& Bucket(int col, int row) const;
  int Winding(const Eigen::Vector2d& p) const;

  std::vector<Edge> edges_;
  double cell_ = 1.0;
  Eigen::Vector2d lo_ = Eigen::Vector2d::Zero();
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::vector<int>> buckets_;
  mutable std::vector<unsigned> stamp_;
  mutable unsigned tick_ = 0;
};

enum class NodeKind { kConvexVertex, kStart, kGoal };

struct GraphNode {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  NodeKind kind = NodeKind::kConvexVertex;
};

struct GraphEdge {
  int a = 0;  // a < b
  int b = 0;
  double cost = 0.0;
};

struct VisibilityGraph {
  PlannerParams params;
  // Raw merged obstacle evidence; polygons are rebuilt from it on update.
  OccupancyImage obstacles;
  std::vector<ObstaclePolygon> polygons;  // inflated
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // sorted by (a, b)
  // Observation counts of cells waiting for min_observations, keyed by
  // global lattice cell floor(x / res), floor(y / res).
  std::map<std::pair<long long, long long>, int> pending;
  std::shared_ptr<const ObstacleIndex> index;

  bool empty() const { return nodes.empty(); }
  // Adjacency lists sorted by neighbour index.
  std::vector<std::vector<std::pair<int, double>>> Adjacency() const;
};

// Nodes at convex vertices of the inflated polygons that are not inside
// another obstacle; edges between mutually visible nodes.
VisibilityGraph BuildGraph(const std::vector<ObstaclePolygon>& inflated,
                           const PlannerParams& params);

// Rasterises obstacle-labelled points, dilates by the inflation radius,
// extracts contours and builds the graph.
VisibilityGraph BuildGraphFromCloud(const PointCloud& labeled_map_cloud,
                                    const PlannerParams& params);
VisibilityGraph BuildGraphFromImage(const OccupancyImage& obstacles,
                                    const PlannerParams& params);

// Merges new obstacle evidence within sensor range of `sensor_xy` and
// rebuilds the graph when anything was merged. Known obstacles are never
// removed. Returns whether the graph changed.
bool UpdateGraph(VisibilityGraph* graph, const PointCloud& labeled_map_cloud,
                 const Eigen::Vector2d& sensor_xy);

struct PlanResult {
  bool reachable = false;
  std::vector<Eigen::Vector2d> path;
  double cost = 0.0;
};

// Dijkstra from start to goal over the graph plus temporary start/goal
// nodes. Ties go to the smaller node index. Throws PlannerError
// ("in collision") when start or goal is inside an inflated obstacle.
PlanResult Plan(const VisibilityGraph& graph, const Eigen::Vector2d& start,
                const Eigen::Vector2d& goal);

double PolylineLength(const std::vector<Eigen::Vector2d>& path);

}  // namespace minenav
