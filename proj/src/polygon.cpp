#include "minenav/polygon.hpp"

#include <algorithm>
#include <cmath>

#include "minenav/contours.hpp"
#include "minenav/geometry.hpp"
#include "minenav/raster.hpp"

namespace minenav {

namespace {

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

int Orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c) {
  const double v = Cross(b - a, c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool OnSegment(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
               const Eigen::Vector2d& p) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() &&
         p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() &&
         p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool SegmentsTouch(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const int o1 = Orientation(a, b, c);
  const int o2 = Orientation(a, b, d);
  const int o3 = Orientation(c, d, a);
  const int o4 = Orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && OnSegment(a, b, c)) || (o2 == 0 && OnSegment(a, b, d)) ||
         (o3 == 0 && OnSegment(c, d, a)) || (o4 == 0 && OnSegment(c, d, b));
}

double PointLineDistance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                         const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return (p - a).norm();
  return std::abs(Cross(ab, p - a)) / len;
}

// Douglas-Peucker over ring[first..last] (indices mod n); marks kept
// vertices.
void SimplifyChain(const std::vector<Eigen::Vector2d>& ring, std::size_t first,
                   std::size_t last, double tolerance, std::vector<bool>* keep) {
  const std::size_t n = ring.size();
  std::vector<std::pair<std::size_t, std::size_t>> stack{{first, last}};
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    double worst = -1.0;
    std::size_t index = a;
    for (std::size_t k = a + 1; k < b; ++k) {
      const double d = PointLineDistance(ring[k % n], ring[a % n], ring[b % n]);
      if (d > worst) {
        worst = d;
        index = k;
      }
    }
    if (worst > tolerance) {
      (*keep)[index % n] = true;
      stack.push_back({index, b});
      stack.push_back({a, index});
    }
  }
}

}  // namespace

double SignedArea(const std::vector<Eigen::Vector2d>& ring) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    sum += Cross(ring[i], ring[(i + 1) % ring.size()]);
  }
  return 0.5 * sum;
}

Eigen::Vector2d Centroid(const std::vector<Eigen::Vector2d>& ring) {
  const double area = SignedArea(ring);
  if (std::abs(area) < 1e-15) {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& v : ring) mean += v;
    return ring.empty() ? mean : mean / static_cast<double>(ring.size());
  }
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Eigen::Vector2d& a = ring[i];
    const Eigen::Vector2d& b = ring[(i + 1) % ring.size()];
    c += (a + b) * Cross(a, b);
  }
  return c / (6.0 * area);
}

bool IsConvex(const std::vector<Eigen::Vector2d>& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (Orientation(ring[i], ring[(i + 1) % n], ring[(i + 2) % n]) < 0) {
      return false;
    }
  }
  return true;
}

bool IsSimple(const std::vector<Eigen::Vector2d>& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = ring[i];
    const Eigen::Vector2d& b = ring[(i + 1) % n];
    // Adjacent edges may only share their common vertex.
    const Eigen::Vector2d& c = ring[(i + 2) % n];
    if (Orientation(a, b, c) == 0 && (c - b).dot(a - b) > 0.0) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (SegmentsTouch(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<Eigen::Vector2d> RemoveCollinear(
    const std::vector<Eigen::Vector2d>& ring, double eps) {
  const std::size_t n = ring.size();
  if (n < 3) return ring;
  std::vector<Eigen::Vector2d> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& prev = ring[(i + n - 1) % n];
    const Eigen::Vector2d& cur = ring[i];
    const Eigen::Vector2d& next = ring[(i + 1) % n];
    const Eigen::Vector2d d0 = cur - prev;
    const Eigen::Vector2d d1 = next - cur;
    if (std::abs(Cross(d0, d1)) <= eps && d0.dot(d1) > 0.0) continue;
    out.push_back(cur);
  }
  return out;
}

std::vector<Eigen::Vector2d> SimplifyRing(
    const std::vector<Eigen::Vector2d>& ring, double tolerance) {
  const std::size_t n = ring.size();
  if (n <= 3 || tolerance <= 0.0) return ring;
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = (ring[i] - ring[0]).squaredNorm();
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<bool> keep(n, false);
  keep[0] = true;
  keep[far] = true;
  SimplifyChain(ring, 0, far, tolerance, &keep);
  SimplifyChain(ring, far, n, tolerance, &keep);
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(ring[i]);
  }
  if (out.size() < 3 || !IsSimple(out)) return ring;
  return out;
}

namespace {

std::vector<Eigen::Vector2d> Octagon(const Eigen::Vector2d& c, double apothem) {
  std::vector<Eigen::Vector2d> out;
  const double r = apothem / std::cos(kPi / 8.0);
  for (int j = 0; j < 8; ++j) {
    const double a = kPi / 8.0 + j * kPi / 4.0;
    out.push_back(c + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
  }
  return out;
}

std::vector<Eigen::Vector2d> InflateConvex(
    const std::vector<Eigen::Vector2d>& ring, double radius) {
  const std::size_t n = ring.size();
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& prev = ring[(i + n - 1) % n];
    const Eigen::Vector2d& cur = ring[i];
    const Eigen::Vector2d& next = ring[(i + 1) % n];
    const Eigen::Vector2d e0 = (cur - prev).normalized();
    const Eigen::Vector2d e1 = (next - cur).normalized();
    const double a0 = std::atan2(-e0.x(), e0.y());
    double turn = NormalizeAngle(std::atan2(-e1.x(), e1.y()) - a0);
    if (turn < 0.0) turn = 0.0;
    out.push_back(cur + radius * Eigen::Vector2d(std::cos(a0), std::sin(a0)));
    if (turn > 1e-12) {
      const int k = std::clamp(
          static_cast<int>(std::ceil(turn / (kPi / 16.0) - 1e-9)), 1, 8);
      const double step = turn / k;
      const double r = radius / std::cos(0.5 * step);
      for (int j = 0; j < k; ++j) {
        const double a = a0 + (j + 0.5) * step;
        out.push_back(cur + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
      }
      const double a1 = a0 + turn;
      out.push_back(cur + radius * Eigen::Vector2d(std::cos(a1), std::sin(a1)));
    }
  }
  return RemoveCollinear(out, 1e-12);
}

std::vector<Eigen::Vector2d> InflateRaster(
    const std::vector<Eigen::Vector2d>& ring, double radius,
    double resolution) {
  Eigen::Vector2d lo = ring[0];
  Eigen::Vector2d hi = ring[0];
  for (const auto& v : ring) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Eigen::Vector2d origin = (lo.array() / resolution).floor() * resolution;
  const int w = static_cast<int>(std::ceil((hi.x() - origin.x()) / resolution)) + 1;
  const int h = static_cast<int>(std::ceil((hi.y() - origin.y()) / resolution)) + 1;
  OccupancyImage image(origin, resolution, w, h);
  const std::size_t n = ring.size();
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      const Eigen::Vector2d p = image.CellCenter(ix, iy);
      bool inside = false;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Eigen::Vector2d& a = ring[i];
        const Eigen::Vector2d& b = ring[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
          inside = !inside;
        }
      }
      if (inside) image.Set(ix, iy, true);
    }
  }
  // Half a cell accounts for the raster covering cell centres only.
  const OccupancyImage grown = DilateImage(image, radius + 0.5 * resolution);
  std::vector<Eigen::Vector2d> best;
  double best_area = 0.0;
  for (const ObstaclePolygon& p : ExtractContours(grown, resolution, false)) {
    const double a = SignedArea(p.vertices);
    if (a > best_area) {
      best_area = a;
      best = p.vertices;
    }
  }
  return best;
}

}  // namespace

ObstaclePolygon Inflate(const ObstaclePolygon& polygon, double radius,
                        double resolution) {
  ObstaclePolygon out = polygon;
  out.inflated = true;
  if (polygon.vertices.empty()) return out;
  const double area = std::abs(SignedArea(polygon.vertices));
  if (area < resolution * resolution || polygon.vertices.size() < 3) {
    if (radius > 0.0) out.vertices = Octagon(Centroid(polygon.vertices), radius);
    return out;
  }
  if (radius <= 0.0) return out;
  std::vector<Eigen::Vector2d> ring = RemoveCollinear(polygon.vertices);
  if (SignedArea(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  out.hole = false;
  out.vertices = IsConvex(ring) ? InflateConvex(ring, radius)
                                : InflateRaster(ring, radius, resolution);
  return out;
}

}  // namespace minenav
