#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "minenav/geometry.hpp"

namespace minenav {

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellIndex {
  int ix = 0;
  int iy = 0;
  bool operator==(const CellIndex&) const = default;
};

// 2.5D mine world. Cell (ix, iy) spans [ix*res, (ix+1)*res) x
// [iy*res, (iy+1)*res) in the map frame; storage is row-major (iy major).
class WorldMap {
 public:
  WorldMap() = default;
  WorldMap(double resolution, int width, int height);

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }

  bool InBounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  std::size_t Index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width_ + ix;
  }
  CellIndex CellAt(double x, double y) const;
  Eigen::Vector2d CellCenter(int ix, int iy) const;

  // Out-of-bounds cells read as wall.
  bool IsWall(int ix, int iy) const {
    return !InBounds(ix, iy) || occupancy_[Index(ix, iy)] != 0;
  }
  bool IsWallAt(double x, double y) const;
  double FloorZ(int ix, int iy) const { return floor_z_[Index(ix, iy)]; }
  double CeilingZ(int ix, int iy) const { return ceiling_z_[Index(ix, iy)]; }
  double FloorZAt(double x, double y) const;

  void SetCell(int ix, int iy, bool wall, double floor_z, double ceiling_z);

  // Distance from (x, y) to the closest wall cell, searched up to max_radius.
  // Returns max_radius when nothing is found.
  double DistanceToWall(double x, double y, double max_radius) const;

  // Number of 4-connected free components.
  int CountFreeComponents() const;

  // Throws WorldError when an invariant does not hold.
  void Validate() const;

  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }
  const std::vector<double>& floor_z() const { return floor_z_; }
  const std::vector<double>& ceiling_z() const { return ceiling_z_; }

  std::map<std::string, Pose2>& named_poses() { return named_poses_; }
  const std::map<std::string, Pose2>& named_poses() const {
    return named_poses_;
  }
  Pose2 NamedPose(const std::string& name) const;

 private:
  double resolution_ = 0.1;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupancy_;
  std::vector<double> floor_z_;
  std::vector<double> ceiling_z_;
  std::map<std::string, Pose2> named_poses_;
};

struct CorridorSegment {
  std::vector<Eigen::Vector2d> polyline;
  double width = 3.0;
  double floor_start = 0.0;
  double floor_end = 0.0;
  double height = 0.0;  // 0 selects WorldSpec::corridor_height
};

struct Intersection {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 2.0;
};

// Tunnel-layout description consumed by GenerateWorld.
struct WorldSpec {
  double resolution = 0.1;
  double width_m = 0.0;
  double height_m = 0.0;
  double corridor_height = 2.8;
  // Walls are offset from the nominal width by up to +-wall_roughness,
  // interpolated between seeded knots roughness_spacing apart.
  double wall_roughness = 0.0;
  double roughness_spacing = 1.0;
  std::uint64_t seed = 0;
  std::vector<CorridorSegment> segments;
  std::vector<Intersection> intersections;
  std::map<std::string, Pose2> poses;
  // Optional scripted survey route used when building the prior map. When
  // empty, every segment polyline is traversed in order.
  std::vector<Eigen::Vector2d> survey_route;
};

// Carves corridors into a closed world. Throws WorldError when a corridor
// touches the boundary ring or leaves the grid.
WorldMap GenerateWorld(const WorldSpec& spec);

WorldSpec ParseWorldSpec(const std::string& json_text);
WorldSpec LoadWorldSpec(const std::filesystem::path& path);

std::string SerializeWorld(const WorldMap& world);
WorldMap ParseWorld(const std::string& json_text);
void SaveWorld(const std::filesystem::path& path, const WorldMap& world);
WorldMap LoadWorld(const std::filesystem::path& path);

}  // namespace minenav
