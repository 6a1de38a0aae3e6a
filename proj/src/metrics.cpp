#include "minenav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace minenav {

namespace {

struct GridSearch {
  std::vector<double> dist;
  std::vector<int> prev;
  int goal = -1;
};

GridSearch SearchGrid(const WorldMap& world, const Eigen::Vector2d& start,
                      const Eigen::Vector2d& goal, double clearance) {
  const int w = world.width();
  const int h = world.height();
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(w) * h, 0);
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      if (world.IsWall(ix, iy)) continue;
      const Eigen::Vector2d c = world.CellCenter(ix, iy);
      if (world.DistanceToWall(c.x(), c.y(), clearance) < clearance) continue;
      ok[world.Index(ix, iy)] = 1;
    }
  }
  const CellIndex s = world.CellAt(start.x(), start.y());
  const CellIndex g = world.CellAt(goal.x(), goal.y());
  if (!world.InBounds(s.ix, s.iy) || !ok[world.Index(s.ix, s.iy)]) {
    throw MetricsError("geodesic start is blocked");
  }
  if (!world.InBounds(g.ix, g.iy) || !ok[world.Index(g.ix, g.iy)]) {
    throw MetricsError("geodesic goal is blocked");
  }

  GridSearch out;
  out.dist.assign(ok.size(), std::numeric_limits<double>::infinity());
  out.prev.assign(ok.size(), -1);
  const int src = static_cast<int>(world.Index(s.ix, s.iy));
  out.goal = static_cast<int>(world.Index(g.ix, g.iy));
  const double res = world.resolution();
  const double diag = std::sqrt(2.0) * res;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  out.dist[src] = 0.0;
  queue.push({0.0, src});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > out.dist[u]) continue;
    if (u == out.goal) break;
    const int ux = u % w;
    const int uy = u / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int vx = ux + dx;
        const int vy = uy + dy;
        if (vx < 0 || vy < 0 || vx >= w || vy >= h) continue;
        const int v = vy * w + vx;
        if (!ok[v]) continue;
        const double nd = d + (dx != 0 && dy != 0 ? diag : res);
        if (nd < out.dist[v]) {
          out.dist[v] = nd;
          out.prev[v] = u;
          queue.push({nd, v});
        }
      }
    }
  }
  if (!std::isfinite(out.dist[out.goal])) {
    throw MetricsError("geodesic goal unreachable");
  }
  return out;
}

double Percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * (sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return sorted[i] + (pos - i) * (sorted[j] - sorted[i]);
}

}  // namespace

double GeodesicDistance(const WorldMap& world, const Eigen::Vector2d& start,
                        const Eigen::Vector2d& goal, double clearance) {
  const GridSearch s = SearchGrid(world, start, goal, clearance);
  return s.dist[s.goal];
}

std::vector<Eigen::Vector2d> GeodesicPath(const WorldMap& world,
                                          const Eigen::Vector2d& start,
                                          const Eigen::Vector2d& goal,
                                          double clearance) {
  const GridSearch s = SearchGrid(world, start, goal, clearance);
  std::vector<Eigen::Vector2d> path;
  for (int v = s.goal; v != -1; v = s.prev[v]) {
    path.push_back(world.CellCenter(v % world.width(), v / world.width()));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double Spl(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw MetricsError("SPL of an empty record list");
  double sum = 0.0;
  for (const TrialRecord& r : records) {
    if (!(r.geodesic > 0.0)) throw MetricsError("SPL needs l_i > 0");
    if (r.success) sum += r.geodesic / std::max(r.path_length, r.geodesic);
  }
  return sum / records.size();
}

double SuccessRate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw MetricsError("SR of an empty record list");
  const auto n = std::count_if(records.begin(), records.end(),
                               [](const TrialRecord& r) { return r.success; });
  return static_cast<double>(n) / records.size();
}

double PathLength(const std::vector<TrajectorySample>& trajectory) {
  double len = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    len += std::hypot(trajectory[i].x - trajectory[i - 1].x,
                      trajectory[i].y - trajectory[i - 1].y);
  }
  return len;
}

StageStats Summarize(std::vector<double> values) {
  StageStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.median = Percentile(values, 0.5);
  s.p95 = Percentile(values, 0.95);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  return s;
}

LatencyReport MakeLatencyReport(
    const std::vector<LatencyTrace>& traces,
    const std::vector<LocalizationSample>& localization) {
  LatencyReport report;
  std::map<std::string, std::vector<double>> per_stage;
  std::vector<double> total;
  for (const LatencyTrace& t : traces) {
    for (const StageSpan& s : t.stages) per_stage[s.stage].push_back(s.ms());
    total.push_back(t.end_to_end_ms());
  }
  for (auto& [stage, values] : per_stage) {
    report.stages[stage] = Summarize(std::move(values));
  }
  report.end_to_end = Summarize(std::move(total));
  std::vector<double> loc;
  for (const LocalizationSample& s : localization) loc.push_back(s.ms());
  report.localization = Summarize(std::move(loc));
  return report;
}

CorrectionStats ComputeCorrectionStats(const TrialRecord& record) {
  if (record.correction_steps.empty()) {
    throw MetricsError("no correction samples");
  }
  CorrectionStats stats;
  stats.median_step = Summarize(record.correction_steps).median;
  for (double d : record.correction_offsets) {
    stats.max_drift = std::max(stats.max_drift, d);
  }
  return stats;
}

}  // namespace minenav
