#include "minenav/visibility_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "minenav/contours.hpp"

namespace minenav {

namespace {

constexpr double kEps = 1e-9;

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Sign of the turn a -> b -> c, zero within kEps metres of collinear.
int Orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
           const Eigen::Vector2d& c) {
  const double len = (b - a).norm();
  const double v = Cross(b - a, c - a);
  if (v > kEps * len) return 1;
  if (v < -kEps * len) return -1;
  return 0;
}

double SegmentDistance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                       const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Parameter of p projected onto the segment a + t (b - a).
double Param(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
             const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  return (p - a).dot(ab) / ab.squaredNorm();
}

}  // namespace

ObstacleIndex::ObstacleIndex(const std::vector<ObstaclePolygon>& polygons,
                             double cell_size)
    : cell_(cell_size) {
  for (const ObstaclePolygon& poly : polygons) {
    const std::size_t n = poly.vertices.size();
    if (n < 3) continue;
    for (std::size_t i = 0; i < n; ++i) {
      edges_.push_back({poly.vertices[i], poly.vertices[(i + 1) % n]});
    }
  }
  if (edges_.empty()) return;
  Eigen::Vector2d hi = edges_[0].a;
  lo_ = edges_[0].a;
  for (const Edge& e : edges_) {
    lo_ = lo_.cwiseMin(e.a).cwiseMin(e.b);
    hi = hi.cwiseMax(e.a).cwiseMax(e.b);
  }
  lo_ -= Eigen::Vector2d::Constant(cell_);
  hi += Eigen::Vector2d::Constant(cell_);
  cols_ = static_cast<int>(std::ceil((hi.x() - lo_.x()) / cell_)) + 1;
  rows_ = static_cast<int>(std::ceil((hi.y() - lo_.y()) / cell_)) + 1;
  buckets_.resize(static_cast<std::size_t>(cols_) * rows_);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    const int c0 = Col(std::min(e.a.x(), e.b.x()) - kEps);
    const int c1 = Col(std::max(e.a.x(), e.b.x()) + kEps);
    const int r0 = Row(std::min(e.a.y(), e.b.y()) - kEps);
    const int r1 = Row(std::max(e.a.y(), e.b.y()) + kEps);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        // Long diagonal edges only go where they pass.
        const Eigen::Vector2d cmin = lo_ + Eigen::Vector2d(c, r) * cell_;
        const Eigen::Vector2d cmid = cmin + Eigen::Vector2d::Constant(0.5 * cell_);
        if (SegmentDistance(cmid, e.a, e.b) > 0.75 * cell_ + kEps) continue;
        buckets_[static_cast<std::size_t>(r) * cols_ + c].push_back(
            static_cast<int>(k));
      }
    }
  }
  stamp_.assign(edges_.size(), 0);
}

int ObstacleIndex::Col(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - lo_.x()) / cell_)), 0,
                    cols_ - 1);
}

int ObstacleIndex::Row(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - lo_.y()) / cell_)), 0,
                    rows_ - 1);
}

const std::vector<int>& ObstacleIndex::Bucket(int col, int row) const {
  return buckets_[static_cast<std::size_t>(row) * cols_ + col];
}

int ObstacleIndex::Winding(const Eigen::Vector2d& p) const {
  if (edges_.empty()) return 0;
  if (p.y() < lo_.y() || p.y() > lo_.y() + rows_ * cell_) return 0;
  const int row = Row(p.y());
  ++tick_;
  int winding = 0;
  for (int c = Col(p.x()); c < cols_; ++c) {
    for (int k : Bucket(c, row)) {
      if (stamp_[k] == tick_) continue;
      stamp_[k] = tick_;
      const Edge& e = edges_[k];
      if (e.a.y() <= p.y()) {
        if (e.b.y() > p.y() && Cross(e.b - e.a, p - e.a) > 0.0) ++winding;
      } else if (e.b.y() <= p.y() && Cross(e.b - e.a, p - e.a) < 0.0) {
        --winding;
      }
    }
  }
  return winding;
}

bool ObstacleIndex::OnBoundary(const Eigen::Vector2d& p) const {
  if (edges_.empty()) return false;
  for (int k : Bucket(Col(p.x()), Row(p.y()))) {
    if (SegmentDistance(p, edges_[k].a, edges_[k].b) <= kEps) return true;
  }
  return false;
}

bool ObstacleIndex::Interior(const Eigen::Vector2d& p) const {
  return !OnBoundary(p) && Winding(p) != 0;
}

bool ObstacleIndex::SegmentVisible(const Eigen::Vector2d& p,
                                   const Eigen::Vector2d& q) const {
  if (edges_.empty()) return true;
  if ((q - p).norm() <= kEps) return !Interior(p);

  // Grid cells along the segment (Amanatides-Woo).
  std::vector<int> candidates;
  ++tick_;
  const Eigen::Vector2d d = q - p;
  int c = Col(p.x());
  int r = Row(p.y());
  const int c_end = Col(q.x());
  const int r_end = Row(q.y());
  const int sc = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
  const int sr = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double tx = kInf, ty = kInf, dtx = kInf, dty = kInf;
  if (sc != 0) {
    tx = (lo_.x() + (c + (sc > 0 ? 1 : 0)) * cell_ - p.x()) / d.x();
    dtx = cell_ / std::abs(d.x());
  }
  if (sr != 0) {
    ty = (lo_.y() + (r + (sr > 0 ? 1 : 0)) * cell_ - p.y()) / d.y();
    dty = cell_ / std::abs(d.y());
  }
  while (true) {
    for (int k : Bucket(c, r)) {
      if (stamp_[k] == tick_) continue;
      stamp_[k] = tick_;
      candidates.push_back(k);
    }
    if (c == c_end && r == r_end) break;
    const bool step_col = r == r_end || (c != c_end && tx < ty);
    if (step_col) {
      c += sc;
      tx += dtx;
    } else {
      r += sr;
      ty += dty;
    }
  }

  std::vector<double> cuts{0.0, 1.0};
  for (int k : candidates) {
    const Edge& e = edges_[k];
    const int o1 = Orient(p, q, e.a);
    const int o2 = Orient(p, q, e.b);
    const int o3 = Orient(e.a, e.b, p);
    const int o4 = Orient(e.a, e.b, q);
    if (o1 * o2 < 0 && o3 * o4 < 0) return false;
    if (o1 == 0) {
      const double t = Param(p, q, e.a);
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
    if (o2 == 0) {
      const double t = Param(p, q, e.b);
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 1e-12) continue;
    const double t = 0.5 * (cuts[i] + cuts[i + 1]);
    if (Interior(p + t * d)) return false;
  }
  return true;
}

std::vector<std::vector<std::pair<int, double>>> VisibilityGraph::Adjacency()
    const {
  std::vector<std::vector<std::pair<int, double>>> adj(nodes.size());
  for (const GraphEdge& e : edges) {
    adj[e.a].emplace_back(e.b, e.cost);
    adj[e.b].emplace_back(e.a, e.cost);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

VisibilityGraph BuildGraph(const std::vector<ObstaclePolygon>& inflated,
                           const PlannerParams& params) {
  params.Validate();
  VisibilityGraph g;
  g.params = params;
  g.polygons = inflated;
  auto index = std::make_shared<ObstacleIndex>(inflated);
  g.index = index;
  for (const ObstaclePolygon& poly : inflated) {
    const std::size_t n = poly.vertices.size();
    if (n < 3) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& prev = poly.vertices[(i + n - 1) % n];
      const Eigen::Vector2d& cur = poly.vertices[i];
      const Eigen::Vector2d& next = poly.vertices[(i + 1) % n];
      if (Orient(prev, cur, next) <= 0) continue;
      if (index->Interior(cur)) continue;
      g.nodes.push_back({cur, NodeKind::kConvexVertex});
    }
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
      const Eigen::Vector2d& a = g.nodes[i].position;
      const Eigen::Vector2d& b = g.nodes[j].position;
      if (index->SegmentVisible(a, b)) {
        g.edges.push_back(
            {static_cast<int>(i), static_cast<int>(j), (b - a).norm()});
      }
    }
  }
  return g;
}

VisibilityGraph BuildGraphFromImage(const OccupancyImage& obstacles,
                                    const PlannerParams& params) {
  params.Validate();
  std::vector<ObstaclePolygon> polygons;
  if (!obstacles.empty()) {
    const OccupancyImage grown =
        DilateImage(obstacles, params.InflationRadius());
    polygons = ExtractContours(grown, params.SimplifyTolerance(), true);
    for (ObstaclePolygon& p : polygons) p.inflated = true;
  }
  VisibilityGraph g = BuildGraph(polygons, params);
  g.obstacles = obstacles;
  return g;
}

VisibilityGraph BuildGraphFromCloud(const PointCloud& labeled_map_cloud,
                                    const PlannerParams& params) {
  return BuildGraphFromImage(RasterizeObstacles(labeled_map_cloud, params),
                             params);
}

bool UpdateGraph(VisibilityGraph* graph, const PointCloud& labeled_map_cloud,
                 const Eigen::Vector2d& sensor_xy) {
  const PlannerParams& params = graph->params;
  params.Validate();
  if (graph->obstacles.empty() && !graph->polygons.empty()) {
    throw PlannerError("graph has no obstacle evidence to merge into");
  }
  const double res = params.resolution;
  std::set<std::pair<long long, long long>> seen;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(
      std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const Point& p : labeled_map_cloud.points) {
    if (p.intensity != kObstacleLabel) continue;
    if (std::hypot(p.x - sensor_xy.x(), p.y - sensor_xy.y()) >
        params.sensor_range) {
      continue;
    }
    seen.insert({static_cast<long long>(std::floor(p.x / res)),
                 static_cast<long long>(std::floor(p.y / res))});
    lo = lo.cwiseMin(Eigen::Vector2d(p.x, p.y));
    hi = hi.cwiseMax(Eigen::Vector2d(p.x, p.y));
  }
  if (seen.empty()) return false;

  OccupancyImage& image = graph->obstacles;
  if (image.empty()) {
    image = OccupancyImage((lo.array() / res).floor() * res, res, 0, 0);
  }
  image.EnsureCovers(lo, hi);

  std::vector<CellXY> to_add;
  for (const auto& key : seen) {
    const Eigen::Vector2d center((key.first + 0.5) * res,
                                 (key.second + 0.5) * res);
    const CellXY c = image.CellOf(center.x(), center.y());
    if (image.Occupied(c.ix, c.iy)) continue;
    if (params.merge_tolerance > 0.0 &&
        DistanceToOccupied(image, center.x(), center.y(),
                           params.merge_tolerance) <= params.merge_tolerance) {
      continue;
    }
    int& count = graph->pending[key];
    if (++count >= params.min_observations) {
      to_add.push_back(c);
      graph->pending.erase(key);
    }
  }
  if (to_add.empty()) return false;
  for (const CellXY& c : to_add) image.Set(c.ix, c.iy, true);
  auto pending = std::move(graph->pending);
  *graph = BuildGraphFromImage(image, params);
  graph->pending = std::move(pending);
  return true;
}

PlanResult Plan(const VisibilityGraph& graph, const Eigen::Vector2d& start,
                const Eigen::Vector2d& goal) {
  const ObstacleIndex* index = graph.index.get();
  if (index && (index->Interior(start) || index->Interior(goal))) {
    throw PlannerError("in collision");
  }
  PlanResult result;
  if ((goal - start).norm() <= 1e-12) {
    result.reachable = true;
    result.path = {start};
    return result;
  }
  auto visible = [index](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return index == nullptr || index->SegmentVisible(a, b);
  };

  const int n = static_cast<int>(graph.nodes.size());
  const int s = n;
  const int t = n + 1;
  std::vector<std::vector<std::pair<int, double>>> adj = graph.Adjacency();
  adj.resize(n + 2);
  std::vector<Eigen::Vector2d> pos(n + 2);
  for (int i = 0; i < n; ++i) pos[i] = graph.nodes[i].position;
  pos[s] = start;
  pos[t] = goal;
  for (int i = 0; i < n; ++i) {
    if (visible(start, pos[i])) {
      const double c = (pos[i] - start).norm();
      adj[s].emplace_back(i, c);
      adj[i].emplace_back(s, c);
    }
    if (visible(pos[i], goal)) {
      const double c = (goal - pos[i]).norm();
      adj[i].emplace_back(t, c);
      adj[t].emplace_back(i, c);
    }
  }
  if (visible(start, goal)) {
    adj[s].emplace_back(t, (goal - start).norm());
    adj[t].emplace_back(s, (goal - start).norm());
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n + 2, kInf);
  std::vector<int> prev(n + 2, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  dist[s] = 0.0;
  queue.push({0.0, s});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u == t) break;
    for (const auto& [v, w] : adj[u]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
        queue.push({nd, v});
      }
    }
  }
  if (!std::isfinite(dist[t])) return result;
  result.reachable = true;
  result.cost = dist[t];
  for (int v = t; v != -1; v = prev[v]) result.path.push_back(pos[v]);
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

double PolylineLength(const std::vector<Eigen::Vector2d>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    len += (path[i] - path[i - 1]).norm();
  }
  return len;
}

}  // namespace minenav
