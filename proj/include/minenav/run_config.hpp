#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "minenav/mission.hpp"
#include "minenav/world.hpp"

namespace minenav {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A goal of the protocol. With several starts, seed s starts from
// starts[(s - 1) mod n].
struct GoalSpec {
  std::string name;
  std::vector<std::string> starts;
  std::string goal;
};

// Run configuration: world spec, protocol and parameter overrides. Relative
// paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path world_spec;
  std::vector<std::uint64_t> seeds;
  std::vector<GoalSpec> goals;
  double survey_step = 0.5;
  double map_voxel = 0.1;
  MissionParams params;
};

RunConfig ParseRunConfig(const std::string& json_text,
                         const std::filesystem::path& base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Default config shipped in the data directory.
std::filesystem::path DefaultRunConfigPath();

// One MissionConfig per (goal, seed), goals in config order, seeds
// ascending. Named poses come from the world.
std::vector<MissionConfig> ExpandTrials(const RunConfig& run,
                                        const WorldMap& world);

}  // namespace minenav
