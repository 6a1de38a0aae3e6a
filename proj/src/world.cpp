#include "minenav/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace minenav {

using nlohmann::json;

WorldMap::WorldMap(double resolution, int width, int height)
    : resolution_(resolution), width_(width), height_(height) {
  if (!(resolution > 0.0) || width < 3 || height < 3) {
    throw WorldError("world needs resolution > 0 and at least 3x3 cells");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  occupancy_.assign(n, 1);
  floor_z_.assign(n, 0.0);
  ceiling_z_.assign(n, 0.0);
}

CellIndex WorldMap::CellAt(double x, double y) const {
  return {static_cast<int>(std::floor(x / resolution_)),
          static_cast<int>(std::floor(y / resolution_))};
}

Eigen::Vector2d WorldMap::CellCenter(int ix, int iy) const {
  return {(ix + 0.5) * resolution_, (iy + 0.5) * resolution_};
}

bool WorldMap::IsWallAt(double x, double y) const {
  const CellIndex c = CellAt(x, y);
  return IsWall(c.ix, c.iy);
}

double WorldMap::FloorZAt(double x, double y) const {
  const CellIndex c = CellAt(x, y);
  if (!InBounds(c.ix, c.iy)) return 0.0;
  return FloorZ(c.ix, c.iy);
}

void WorldMap::SetCell(int ix, int iy, bool wall, double floor_z,
                       double ceiling_z) {
  const std::size_t i = Index(ix, iy);
  occupancy_[i] = wall ? 1 : 0;
  floor_z_[i] = floor_z;
  ceiling_z_[i] = ceiling_z;
}

double WorldMap::DistanceToWall(double x, double y, double max_radius) const {
  const CellIndex c = CellAt(x, y);
  const int r = static_cast<int>(std::ceil(max_radius / resolution_)) + 1;
  double best = max_radius;
  for (int iy = c.iy - r; iy <= c.iy + r; ++iy) {
    for (int ix = c.ix - r; ix <= c.ix + r; ++ix) {
      if (!IsWall(ix, iy)) continue;
      const double x0 = ix * resolution_;
      const double y0 = iy * resolution_;
      const double dx = std::max({x0 - x, 0.0, x - (x0 + resolution_)});
      const double dy = std::max({y0 - y, 0.0, y - (y0 + resolution_)});
      best = std::min(best, std::hypot(dx, dy));
    }
  }
  return best;
}

int WorldMap::CountFreeComponents() const {
  std::vector<int> label(occupancy_.size(), -1);
  int components = 0;
  std::vector<CellIndex> stack;
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      if (IsWall(ix, iy) || label[Index(ix, iy)] >= 0) continue;
      stack.push_back({ix, iy});
      label[Index(ix, iy)] = components;
      while (!stack.empty()) {
        const CellIndex cur = stack.back();
        stack.pop_back();
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cur.ix + kDx[k];
          const int ny = cur.iy + kDy[k];
          if (IsWall(nx, ny) || label[Index(nx, ny)] >= 0) continue;
          label[Index(nx, ny)] = components;
          stack.push_back({nx, ny});
        }
      }
      ++components;
    }
  }
  return components;
}

void WorldMap::Validate() const {
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      const bool boundary =
          ix == 0 || iy == 0 || ix == width_ - 1 || iy == height_ - 1;
      if (boundary && !IsWall(ix, iy)) {
        throw WorldError("world is not closed: free boundary cell");
      }
      if (!IsWall(ix, iy) && !(CeilingZ(ix, iy) > FloorZ(ix, iy))) {
        throw WorldError("free cell with ceiling not above floor");
      }
    }
  }
}

Pose2 WorldMap::NamedPose(const std::string& name) const {
  const auto it = named_poses_.find(name);
  if (it == named_poses_.end()) throw WorldError("unknown pose: " + name);
  return it->second;
}

namespace {

struct CenterlineHit {
  double perp = std::numeric_limits<double>::infinity();
  double floor_z = 0.0;
  double height = 0.0;
};

// Distance from p to a segment's centerline plus the floor height at the
// closest point. `inside` reports whether p lies in the carved footprint
// (rectangles around each piece plus discs at interior joints).
// Seeded knots of the wall offset profile, one list per side, spaced
// `spacing` metres along the centerline.
struct WallProfile {
  double amplitude = 0.0;
  double spacing = 1.0;
  std::vector<double> knots[2];

  double Offset(int side, double s) const {
    const std::vector<double>& k = knots[side];
    if (amplitude <= 0.0 || k.empty()) return 0.0;
    const double u = std::clamp(s / spacing, 0.0, k.size() - 1.0);
    const std::size_t i = std::min(static_cast<std::size_t>(u), k.size() - 2);
    const double f = u - i;
    return amplitude * ((1.0 - f) * k[i] + f * k[i + 1]);
  }
};

WallProfile MakeProfile(const CorridorSegment& seg, const WorldSpec& spec,
                        std::size_t index) {
  WallProfile prof;
  prof.amplitude = spec.wall_roughness;
  prof.spacing = spec.roughness_spacing;
  if (prof.amplitude <= 0.0) return prof;
  double total = 0.0;
  for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
    total += (seg.polyline[i] - seg.polyline[i - 1]).norm();
  }
  const std::size_t n = static_cast<std::size_t>(total / prof.spacing) + 2;
  std::mt19937_64 rng(spec.seed * 1000003ULL + index);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& side : prof.knots) {
    side.resize(n);
    for (double& v : side) v = u(rng);
  }
  return prof;
}

CenterlineHit ProbeSegment(const CorridorSegment& seg, const WallProfile& prof,
                           double default_height, const Eigen::Vector2d& p,
                           bool* inside) {
  CenterlineHit best;
  *inside = false;
  double total = 0.0;
  std::vector<double> arc{0.0};
  for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
    total += (seg.polyline[i] - seg.polyline[i - 1]).norm();
    arc.push_back(total);
  }
  const double half = 0.5 * seg.width;
  const double height = seg.height > 0.0 ? seg.height : default_height;
  for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
    const Eigen::Vector2d a = seg.polyline[i - 1];
    const Eigen::Vector2d b = seg.polyline[i];
    const Eigen::Vector2d ab = b - a;
    const double len = ab.norm();
    if (len <= 0.0) continue;
    const Eigen::Vector2d dir = ab / len;
    const double t = (p - a).dot(dir);
    const double tc = std::clamp(t, 0.0, len);
    const double perp = (p - (a + tc * dir)).norm();
    const bool joint_a = i > 1;
    const bool joint_b = i + 1 < seg.polyline.size();
    const double cross = (p - a).x() * dir.y() - (p - a).y() * dir.x();
    const double local =
        half + prof.Offset(cross > 0.0 ? 1 : 0, arc[i - 1] + tc);
    const bool in_rect = t >= 0.0 && t <= len && std::abs(cross) <= local;
    const bool in_joint = ((joint_a && t < 0.0) || (joint_b && t > len)) &&
                          perp <= local;
    if (in_rect || in_joint) *inside = true;
    if (perp < best.perp) {
      const double s = arc[i - 1] + tc;
      const double frac = total > 0.0 ? s / total : 0.0;
      best.perp = perp;
      best.floor_z = seg.floor_start + frac * (seg.floor_end - seg.floor_start);
      best.height = height;
    }
  }
  return best;
}

}  // namespace

WorldMap GenerateWorld(const WorldSpec& spec) {
  if (!(spec.resolution > 0.0)) throw WorldError("resolution must be > 0");
  const int width = static_cast<int>(std::lround(spec.width_m / spec.resolution));
  const int height =
      static_cast<int>(std::lround(spec.height_m / spec.resolution));
  WorldMap world(spec.resolution, width, height);
  if (spec.wall_roughness < 0.0 || !(spec.roughness_spacing > 0.0)) {
    throw WorldError("invalid wall roughness");
  }

  for (const CorridorSegment& seg : spec.segments) {
    if (seg.polyline.size() < 2) throw WorldError("segment needs >= 2 points");
    if (!(seg.width > 2.0 * spec.wall_roughness)) {
      throw WorldError("segment width must exceed twice the wall roughness");
    }
  }
  for (const Intersection& in : spec.intersections) {
    if (in.center.x() - in.radius < spec.resolution ||
        in.center.y() - in.radius < spec.resolution ||
        in.center.x() + in.radius > spec.width_m - spec.resolution ||
        in.center.y() + in.radius > spec.height_m - spec.resolution) {
      throw WorldError("intersection exits the grid");
    }
  }

  std::vector<WallProfile> profiles;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    profiles.push_back(MakeProfile(spec.segments[i], spec, i));
  }
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      const Eigen::Vector2d p = world.CellCenter(ix, iy);
      bool carved = false;
      CenterlineHit nearest;
      for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        bool inside = false;
        const CenterlineHit hit = ProbeSegment(
            spec.segments[i], profiles[i], spec.corridor_height, p, &inside);
        carved = carved || inside;
        if (hit.perp < nearest.perp) nearest = hit;
      }
      for (const Intersection& in : spec.intersections) {
        if ((p - in.center).norm() <= in.radius) carved = true;
      }
      if (!carved) continue;
      const bool boundary =
          ix == 0 || iy == 0 || ix == width - 1 || iy == height - 1;
      if (boundary) throw WorldError("corridor exits the grid");
      world.SetCell(ix, iy, false, nearest.floor_z,
                    nearest.floor_z + nearest.height);
    }
  }
  world.named_poses() = spec.poses;
  world.Validate();
  return world;
}

namespace {

Eigen::Vector2d ParseXy(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw WorldError("expected [x, y], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::map<std::string, Pose2> ParsePoses(const json& j) {
  std::map<std::string, Pose2> poses;
  if (j.is_null()) return poses;
  for (const auto& [name, v] : j.items()) {
    if (!v.is_array() || v.size() != 3) {
      throw WorldError("pose '" + name + "' must be [x, y, yaw]");
    }
    poses[name] = Pose2(v[0].get<double>(), v[1].get<double>(),
                        v[2].get<double>());
  }
  return poses;
}

json PosesToJson(const std::map<std::string, Pose2>& poses) {
  json j = json::object();
  for (const auto& [name, p] : poses) j[name] = {p.x, p.y, p.yaw};
  return j;
}

}  // namespace

WorldSpec ParseWorldSpec(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    WorldSpec spec;
    spec.resolution = j.value("resolution", 0.1);
    spec.width_m = j.at("width_m").get<double>();
    spec.height_m = j.at("height_m").get<double>();
    spec.corridor_height = j.value("corridor_height", 2.8);
    spec.wall_roughness = j.value("wall_roughness", 0.0);
    spec.roughness_spacing = j.value("roughness_spacing", 1.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const json& s : j.at("segments")) {
      CorridorSegment seg;
      for (const json& v : s.at("polyline")) seg.polyline.push_back(ParseXy(v));
      seg.width = s.at("width").get<double>();
      if (s.contains("floor")) {
        seg.floor_start = s["floor"].at(0).get<double>();
        seg.floor_end = s["floor"].at(1).get<double>();
      }
      seg.height = s.value("height", 0.0);
      spec.segments.push_back(std::move(seg));
    }
    if (j.contains("intersections")) {
      for (const json& s : j["intersections"]) {
        spec.intersections.push_back(
            {ParseXy(s.at("center")), s.at("radius").get<double>()});
      }
    }
    if (j.contains("poses")) spec.poses = ParsePoses(j["poses"]);
    if (j.contains("survey_route")) {
      for (const json& v : j["survey_route"]) {
        spec.survey_route.push_back(ParseXy(v));
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw WorldError(std::string("world spec: ") + e.what());
  }
}

WorldSpec LoadWorldSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WorldError("cannot open world spec: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseWorldSpec(ss.str());
}

std::string SerializeWorld(const WorldMap& world) {
  json j;
  j["resolution"] = world.resolution();
  j["width"] = world.width();
  j["height"] = world.height();
  j["occupancy"] = world.occupancy();
  j["floor_z"] = world.floor_z();
  j["ceiling_z"] = world.ceiling_z();
  j["poses"] = PosesToJson(world.named_poses());
  return j.dump();
}

WorldMap ParseWorld(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    WorldMap world(j.at("resolution").get<double>(), j.at("width").get<int>(),
                   j.at("height").get<int>());
    const auto occ = j.at("occupancy").get<std::vector<int>>();
    const auto floor = j.at("floor_z").get<std::vector<double>>();
    const auto ceil = j.at("ceiling_z").get<std::vector<double>>();
    const std::size_t n = static_cast<std::size_t>(world.width()) *
                          world.height();
    if (occ.size() != n || floor.size() != n || ceil.size() != n) {
      throw WorldError("world arrays do not match width*height");
    }
    for (int iy = 0; iy < world.height(); ++iy) {
      for (int ix = 0; ix < world.width(); ++ix) {
        const std::size_t i = world.Index(ix, iy);
        world.SetCell(ix, iy, occ[i] != 0, floor[i], ceil[i]);
      }
    }
    if (j.contains("poses")) world.named_poses() = ParsePoses(j["poses"]);
    world.Validate();
    return world;
  } catch (const json::exception& e) {
    throw WorldError(std::string("world file: ") + e.what());
  }
}

void SaveWorld(const std::filesystem::path& path, const WorldMap& world) {
  std::ofstream out(path);
  if (!out) throw WorldError("cannot write world: " + path.string());
  out << SerializeWorld(world) << '\n';
}

WorldMap LoadWorld(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WorldError("cannot open world: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseWorld(ss.str());
}

}  // namespace minenav
