#include "minenav/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace minenav {

using nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;

Setter Number(double* target) {
  return [target](const json& v) { *target = v.get<double>(); };
}
Setter Degrees(double* target) {
  return [target](const json& v) { *target = DegToRad(v.get<double>()); };
}
Setter Integer(int* target) {
  return [target](const json& v) { *target = v.get<int>(); };
}
Setter Flag(bool* target) {
  return [target](const json& v) { *target = v.get<bool>(); };
}

void Apply(const json& section, const std::string& prefix,
           const std::map<std::string, Setter>& setters) {
  if (!section.is_object()) throw ConfigError(prefix + " must be an object");
  for (const auto& [key, value] : section.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("unknown parameter " + prefix + "." + key);
    }
    try {
      it->second(value);
    } catch (const json::exception&) {
      throw ConfigError("bad value for " + prefix + "." + key + ": " +
                        value.dump());
    }
  }
}

void ApplyParams(const json& j, MissionParams* p) {
  std::map<std::string, Setter> top = {
      {"tick_s", Number(&p->tick_s)},
      {"scan_rate_hz", Number(&p->scan_rate_hz)},
      {"plan_rate_hz", Number(&p->plan_rate_hz)},
      {"success_radius", Number(&p->success_radius)},
      {"timeout_s", Number(&p->timeout_s)},
      {"geodesic_clearance", Number(&p->geodesic_clearance)},
      {"initial_xy_error", Number(&p->initial_xy_error)},
      {"initial_yaw_error_deg", Degrees(&p->initial_yaw_error)},
      {"localization", Flag(&p->localization)},
      {"stall_at_s", Number(&p->stall_at_s)},
      {"stall_s", Number(&p->stall_s)},
  };
  top["lidar"] = [p](const json& s) {
    Apply(s, "params.lidar",
          {{"channels", Integer(&p->lidar.channels)},
           {"vertical_fov_deg", Number(&p->lidar.vertical_fov_deg)},
           {"rays_per_revolution", Integer(&p->lidar.rays_per_revolution)},
           {"min_range", Number(&p->lidar.min_range)},
           {"max_range", Number(&p->lidar.max_range)}});
  };
  top["odometry"] = [p](const json& s) {
    Apply(s, "params.odometry",
          {{"bias_x", Number(&p->odometry.translation_bias.x())},
           {"bias_y", Number(&p->odometry.translation_bias.y())},
           {"yaw_bias", Number(&p->odometry.yaw_bias)},
           {"noise_std", Number(&p->odometry.noise_std)}});
  };
  top["planner"] = [p](const json& s) {
    Apply(s, "params.planner",
          {{"robot_radius", Number(&p->planner.robot_radius)},
           {"resolution", Number(&p->planner.resolution)},
           {"sensor_range", Number(&p->planner.sensor_range)},
           {"merge_tolerance", Number(&p->planner.merge_tolerance)},
           {"min_observations", Integer(&p->planner.min_observations)}});
  };
  top["controller"] = [p](const json& s) {
    Apply(s, "params.controller",
          {{"lookahead", Number(&p->controller.lookahead)},
           {"v_max", Number(&p->controller.v_max)},
           {"v_min", Number(&p->controller.v_min)},
           {"regulation_radius", Number(&p->controller.regulation_radius)},
           {"proximity_distance", Number(&p->controller.proximity_distance)},
           {"goal_tolerance", Number(&p->controller.goal_tolerance)},
           {"omega_max", Number(&p->controller.omega_max)}});
  };
  top["latency_ms"] = [p](const json& s) {
    std::map<std::string, Setter> stages;
    for (const std::string& stage : CriticalStages()) {
      stages[stage] = Number(&p->latency.critical_ms[stage]);
    }
    stages["localization"] = Number(&p->latency.localization_ms);
    stages["jitter"] = Number(&p->latency.jitter);
    Apply(s, "params.latency_ms", stages);
  };
  Apply(j, "params", top);
}

std::vector<std::string> StringList(const json& j, const std::string& what) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array() || j.empty()) {
    throw ConfigError(what + " must be a name or a non-empty list of names");
  }
  return j.get<std::vector<std::string>>();
}

}  // namespace

RunConfig ParseRunConfig(const std::string& json_text,
                         const std::filesystem::path& base_dir) {
  RunConfig run;
  try {
    const json j = json::parse(json_text);
    if (!j.contains("world_spec")) throw ConfigError("missing world_spec");
    run.world_spec = base_dir / j["world_spec"].get<std::string>();
    run.survey_step = j.value("survey_step", run.survey_step);
    run.map_voxel = j.value("map_voxel", run.map_voxel);
    if (j.contains("seeds")) {
      run.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    if (j.contains("goals")) {
      for (const json& g : j["goals"]) {
        GoalSpec spec;
        spec.name = g.at("name").get<std::string>();
        if (g.contains("starts")) {
          spec.starts = StringList(g["starts"], "goal " + spec.name + " starts");
        } else {
          spec.starts = StringList(g.at("start"), "goal " + spec.name + " start");
        }
        spec.goal = g.at("goal").get<std::string>();
        run.goals.push_back(std::move(spec));
      }
    }
    if (j.contains("params")) ApplyParams(j["params"], &run.params);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (run.seeds.empty()) throw ConfigError("run config needs at least one seed");
  std::sort(run.seeds.begin(), run.seeds.end());
  run.seeds.erase(std::unique(run.seeds.begin(), run.seeds.end()),
                  run.seeds.end());
  if (!(run.survey_step > 0.0) || !(run.map_voxel > 0.0)) {
    throw ConfigError("survey_step and map_voxel must be > 0");
  }
  try {
    run.params.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("run config params: ") + e.what());
  }
  return run;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str(), path.parent_path());
}

std::filesystem::path DefaultRunConfigPath() {
  return std::filesystem::path(MINENAV_DATA_DIR) / "run.json";
}

std::vector<MissionConfig> ExpandTrials(const RunConfig& run,
                                        const WorldMap& world) {
  std::vector<MissionConfig> trials;
  for (const GoalSpec& goal : run.goals) {
    for (std::uint64_t seed : run.seeds) {
      MissionConfig cfg;
      cfg.goal_name = goal.name;
      cfg.seed = seed;
      const std::size_t n = goal.starts.size();
      const std::string& start =
          goal.starts[static_cast<std::size_t>((seed + n - 1) % n)];
      try {
        cfg.initial_pose = world.NamedPose(start);
        cfg.goal_pose = world.NamedPose(goal.goal);
      } catch (const std::exception& e) {
        throw ConfigError("goal " + goal.name + ": " + e.what());
      }
      cfg.params = run.params;
      trials.push_back(std::move(cfg));
    }
  }
  return trials;
}

}  // namespace minenav
