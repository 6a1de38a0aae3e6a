#include "minenav/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "minenav/metrics.hpp"

namespace minenav {

namespace {

constexpr double kMargin = 10.0;
constexpr double kLabel = 16.0;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Frame {
  double ox = 0.0;  // panel origin, px
  double oy = 0.0;
  double scale = 1.0;
  double height_m = 0.0;
  double X(double x) const { return ox + x * scale; }
  double Y(double y) const { return oy + (height_m - y) * scale; }
};

// Boundary between wall and free cells as merged horizontal and vertical
// runs, in a single path.
std::string OutlinePath(const WorldMap& world, const Frame& f) {
  const double res = world.resolution();
  std::ostringstream d;
  for (int iy = 0; iy <= world.height(); ++iy) {
    int run = -1;
    for (int ix = 0; ix <= world.width(); ++ix) {
      const bool edge = ix < world.width() &&
                        world.IsWall(ix, iy) != world.IsWall(ix, iy - 1);
      if (edge && run < 0) run = ix;
      if (!edge && run >= 0) {
        d << 'M' << Num(f.X(run * res)) << ' ' << Num(f.Y(iy * res)) << 'H'
          << Num(f.X(ix * res));
        run = -1;
      }
    }
  }
  for (int ix = 0; ix <= world.width(); ++ix) {
    int run = -1;
    for (int iy = 0; iy <= world.height(); ++iy) {
      const bool edge = iy < world.height() &&
                        world.IsWall(ix, iy) != world.IsWall(ix - 1, iy);
      if (edge && run < 0) run = iy;
      if (!edge && run >= 0) {
        d << 'M' << Num(f.X(ix * res)) << ' ' << Num(f.Y(run * res)) << 'V'
          << Num(f.Y(iy * res));
        run = -1;
      }
    }
  }
  return d.str();
}

std::string Polyline(const std::vector<Eigen::Vector2d>& pts, const Frame& f) {
  std::ostringstream s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s << (i ? " " : "") << Num(f.X(pts[i].x())) << ',' << Num(f.Y(pts[i].y()));
  }
  return s.str();
}

void DrawTrial(std::ostringstream& out, const WorldMap& world,
               const TrialRecord& r, const Frame& f,
               const PlotOptions& options, double label_x, double label_y) {
  const Eigen::Vector2d start(r.start_x, r.start_y);
  const Eigen::Vector2d goal(r.goal_x, r.goal_y);
  try {
    const auto geo =
        GeodesicPath(world, start, goal, options.geodesic_clearance);
    out << "<polyline class=\"geodesic\" fill=\"none\" stroke=\"#1f5fbf\" "
           "stroke-width=\"1.5\" stroke-dasharray=\"6 4\" points=\""
        << Polyline(geo, f) << "\"/>\n";
  } catch (const MetricsError&) {
    // No reference path to draw.
  }
  std::vector<Eigen::Vector2d> traj;
  for (const TrajectorySample& s : r.trajectory) traj.emplace_back(s.x, s.y);
  out << "<polyline class=\"executed\" fill=\"none\" stroke=\"#d62728\" "
         "stroke-width=\"1.5\" points=\""
      << Polyline(traj, f) << "\"/>\n";
  out << "<circle class=\"start\" cx=\"" << Num(f.X(start.x())) << "\" cy=\""
      << Num(f.Y(start.y())) << "\" r=\"4\" fill=\"#2ca02c\"/>\n";
  out << "<circle class=\"goal\" cx=\"" << Num(f.X(goal.x())) << "\" cy=\""
      << Num(f.Y(goal.y())) << "\" r=\"4\" fill=\"none\" stroke=\"#000\" "
         "stroke-width=\"1.5\"/>\n";
  const std::string ratio =
      r.geodesic > 0.0 ? Num(r.path_length / r.geodesic) : "n/a";
  out << "<text class=\"annotation\" x=\"" << Num(label_x) << "\" y=\""
      << Num(label_y) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << r.goal << " seed " << r.seed << (r.success ? "" : " FAIL")
      << "  p/l=" << ratio << "</text>\n";
}

}  // namespace

std::string RenderSvg(const WorldMap& world,
                      const std::vector<TrialRecord>& records,
                      const PlotOptions& options) {
  const double scale = options.pixels_per_metre;
  const double pw = world.width_m() * scale;
  const double ph = world.height_m() * scale;

  std::vector<std::string> goals;
  std::map<std::string, std::vector<const TrialRecord*>> by_goal;
  for (const TrialRecord& r : records) {
    if (!by_goal.count(r.goal)) goals.push_back(r.goal);
    by_goal[r.goal].push_back(&r);
  }
  int rows = 1;
  int cols = 1;
  if (options.grid && !records.empty()) {
    rows = static_cast<int>(goals.size());
    for (const auto& [goal, list] : by_goal) {
      cols = std::max(cols, static_cast<int>(list.size()));
    }
  }
  const double cell_w = pw + kMargin;
  const double cell_h = ph + kMargin + kLabel;
  const double width = kMargin + cols * cell_w;
  const double height = kMargin + rows * cell_h;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(width)
      << "\" height=\"" << Num(height) << "\" viewBox=\"0 0 " << Num(width)
      << ' ' << Num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  auto panel = [&](int row, int col) {
    Frame f;
    f.ox = kMargin + col * cell_w;
    f.oy = kMargin + kLabel + row * cell_h;
    f.scale = scale;
    f.height_m = world.height_m();
    out << "<g class=\"panel\">\n";
    out << "<path class=\"outline\" fill=\"none\" stroke=\"#444\" "
           "stroke-width=\"1\" d=\""
        << OutlinePath(world, f) << "\"/>\n";
    return f;
  };

  if (!options.grid || records.empty()) {
    const Frame f = panel(0, 0);
    // Labels stack above each goal marker.
    std::map<std::string, int> stacked;
    for (const TrialRecord& r : records) {
      const int n = stacked[r.goal]++;
      DrawTrial(out, world, r, f, options, f.X(r.goal_x) + 6.0,
                f.Y(r.goal_y) - 6.0 - 12.0 * n);
    }
    out << "</g>\n";
  } else {
    for (std::size_t row = 0; row < goals.size(); ++row) {
      const auto& list = by_goal[goals[row]];
      for (std::size_t col = 0; col < list.size(); ++col) {
        const Frame f = panel(static_cast<int>(row), static_cast<int>(col));
        DrawTrial(out, world, *list[col], f, options, f.ox, f.oy - 4.0);
        out << "</g>\n";
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace minenav
