#include "minenav/contours.hpp"

#include <array>

namespace minenav {

namespace {

// Edge directions on the corner lattice.
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

}  // namespace

std::vector<ObstaclePolygon> TraceContours(const OccupancyImage& image) {
  std::vector<ObstaclePolygon> out;
  if (image.empty()) return out;
  const int w = image.width();
  const int h = image.height();
  const int vw = w + 1;
  auto vid = [vw](int x, int y) { return static_cast<std::size_t>(y) * vw + x; };
  // Bit d set: a boundary edge leaves this corner in direction d.
  std::vector<std::uint8_t> out_edges(static_cast<std::size_t>(vw) * (h + 1), 0);
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      if (!image.Occupied(ix, iy)) continue;
      if (!image.Occupied(ix, iy - 1)) out_edges[vid(ix, iy)] |= 1 << 0;
      if (!image.Occupied(ix + 1, iy)) out_edges[vid(ix + 1, iy)] |= 1 << 1;
      if (!image.Occupied(ix, iy + 1)) out_edges[vid(ix + 1, iy + 1)] |= 1 << 2;
      if (!image.Occupied(ix - 1, iy)) out_edges[vid(ix, iy + 1)] |= 1 << 3;
    }
  }

  std::vector<std::uint8_t> used(out_edges.size(), 0);
  for (int y = 0; y <= h; ++y) {
    for (int x = 0; x <= w; ++x) {
      for (int d0 = 0; d0 < 4; ++d0) {
        const std::size_t v0 = vid(x, y);
        if (!(out_edges[v0] & (1 << d0)) || (used[v0] & (1 << d0))) continue;
        std::vector<Eigen::Vector2d> ring;
        int cx = x;
        int cy = y;
        int d = d0;
        while (true) {
          used[vid(cx, cy)] |= 1 << d;
          ring.push_back(image.Corner(cx, cy));
          cx += kDx[d];
          cy += kDy[d];
          const std::uint8_t options = out_edges[vid(cx, cy)];
          // Prefer the right turn at saddles so diagonal cells join.
          const int right = (d + 3) % 4;
          const int left = (d + 1) % 4;
          if (options & (1 << right)) {
            d = right;
          } else if (options & (1 << d)) {
            // straight on
          } else {
            d = left;
          }
          if (cx == x && cy == y && d == d0) break;
        }
        ObstaclePolygon poly;
        poly.vertices = RemoveCollinear(ring);
        poly.hole = SignedArea(poly.vertices) < 0.0;
        out.push_back(std::move(poly));
      }
    }
  }
  return out;
}

std::vector<ObstaclePolygon> ExtractContours(const OccupancyImage& image,
                                             double tolerance,
                                             bool keep_holes) {
  if (tolerance < 0.0) tolerance = 2.0 * image.resolution();
  std::vector<ObstaclePolygon> out;
  for (ObstaclePolygon& poly : TraceContours(image)) {
    if (poly.hole && !keep_holes) continue;
    poly.vertices = SimplifyRing(poly.vertices, tolerance);
    out.push_back(std::move(poly));
  }
  return out;
}

}  // namespace minenav
