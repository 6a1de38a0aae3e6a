// minenav: map, graph, run, eval and plot commands for the mine navigation
// stack.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "minenav/graph_io.hpp"
#include "minenav/metrics.hpp"
#include "minenav/mission.hpp"
#include "minenav/pcd_io.hpp"
#include "minenav/records_io.hpp"
#include "minenav/run_config.hpp"
#include "minenav/survey.hpp"
#include "minenav/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace minenav;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> goals;
  bool force = false;
  double timeout_s = 0.0;
  int parallel = 1;
  bool grid = false;
};

fs::path WorldPath(const Options& o) { return fs::path(o.out) / "world.json"; }
fs::path MapPath(const Options& o) { return fs::path(o.out) / "map.pcd"; }
fs::path GraphPath(const Options& o) { return fs::path(o.out) / "graph.json"; }
fs::path RecordsPath(const Options& o) {
  return fs::path(o.out) / "trials.jsonl";
}

RunConfig LoadConfig(const Options& o) {
  return LoadRunConfig(o.config.empty() ? DefaultRunConfigPath()
                                        : fs::path(o.config));
}

void Require(const fs::path& path, const char* produced_by) {
  if (!fs::exists(path)) {
    throw std::runtime_error(path.string() + " not found; run '" +
                             produced_by + "' first");
  }
}

nlohmann::ordered_json StatsJson(const StageStats& s) {
  return {{"count", s.count},
          {"median_ms", s.median},
          {"mean_ms", s.mean},
          {"p95_ms", s.p95}};
}

nlohmann::ordered_json LatencyJson(const std::vector<TrialRecord>& records,
                                   const ComputeTimes* compute) {
  std::vector<LatencyTrace> traces;
  std::vector<LocalizationSample> loc;
  for (const TrialRecord& r : records) {
    traces.insert(traces.end(), r.traces.begin(), r.traces.end());
    loc.insert(loc.end(), r.localization_samples.begin(),
               r.localization_samples.end());
  }
  const LatencyReport report = MakeLatencyReport(traces, loc);
  nlohmann::ordered_json j;
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const std::string& stage : CriticalStages()) {
    auto it = report.stages.find(stage);
    if (it != report.stages.end()) stages[stage] = StatsJson(it->second);
  }
  j["critical_path"] = std::move(stages);
  j["end_to_end"] = StatsJson(report.end_to_end);
  j["localization_async"] = StatsJson(report.localization);
  if (compute) {
    nlohmann::ordered_json measured = nlohmann::ordered_json::object();
    for (const auto& [stage, values] : compute->ms) {
      measured[stage] = StatsJson(Summarize(values));
    }
    j["measured_compute"] = std::move(measured);
  }
  return j;
}

void PrintSummary(const std::vector<TrialRecord>& records) {
  const auto rows = SummarizeRecords(records);
  std::printf("%-8s %7s %14s %14s %14s %12s\n", "Goal", "Succ.", "Path (m)",
              "p/l", "SPL", "Time (s)");
  for (const SummaryRow& r : rows) {
    std::printf("%-8s %3d/%-3d %7.1f ± %-4.1f %6.2f ± %-5.2f %6.2f ± %-5.2f "
                "%5.0f ± %-4.0f\n",
                r.goal.c_str(), r.successes, r.trials, r.path.mean,
                r.path.std, r.ratio.mean, r.ratio.std, r.spl.mean, r.spl.std,
                r.time.mean, r.time.std);
  }
}

int CmdMap(const Options& o) {
  const RunConfig run = LoadConfig(o);
  const WorldSpec spec = LoadWorldSpec(run.world_spec);
  const WorldMap world = GenerateWorld(spec);
  const int components = world.CountFreeComponents();
  if (components != 1) {
    throw WorldError("world has " + std::to_string(components) +
                     " disconnected free regions");
  }
  const PointCloud map =
      BuildPriorMap(world, SurveyPoses(spec, run.survey_step),
                    run.params.lidar, run.params.limits, run.map_voxel);
  fs::create_directories(o.out);
  WriteFileAtomic(WorldPath(o), SerializeWorld(world) + "\n");
  std::ostringstream pcd;
  WritePcd(pcd, map);
  WriteFileAtomic(MapPath(o), pcd.str());
  std::printf("world %dx%d cells -> %s\nprior map %zu points -> %s\n",
              world.width(), world.height(), WorldPath(o).c_str(), map.size(),
              MapPath(o).c_str());
  return 0;
}

int CmdGraph(const Options& o) {
  const RunConfig run = LoadConfig(o);
  Require(MapPath(o), "map");
  const PointCloud map = ReadPcd(MapPath(o));
  VisibilityGraph graph;
  graph.params = run.params.planner;
  if (map.empty()) {
    std::fprintf(stderr, "warning: prior map is empty; writing an empty graph\n");
  } else {
    graph = BuildPriorGraph(map, run.params);
  }
  fs::create_directories(o.out);
  WriteFileAtomic(GraphPath(o), SerializeGraph(graph));
  std::printf("graph %zu nodes, %zu edges, %zu polygons -> %s\n",
              graph.nodes.size(), graph.edges.size(), graph.polygons.size(),
              GraphPath(o).c_str());
  return 0;
}

int CmdRun(const Options& o) {
  RunConfig run = LoadConfig(o);
  if (!o.seeds.empty()) run.seeds = o.seeds;
  if (o.timeout_s > 0.0) run.params.timeout_s = o.timeout_s;
  if (!o.goals.empty()) {
    std::vector<GoalSpec> kept;
    for (const GoalSpec& g : run.goals) {
      if (std::find(o.goals.begin(), o.goals.end(), g.name) != o.goals.end()) {
        kept.push_back(g);
      }
    }
    for (const std::string& name : o.goals) {
      if (std::none_of(kept.begin(), kept.end(),
                       [&](const GoalSpec& g) { return g.name == name; })) {
        throw ConfigError("unknown goal " + name);
      }
    }
    run.goals = kept;
  }
  if (o.parallel < 1) throw ConfigError("--parallel must be >= 1");

  fs::create_directories(o.out);
  if (fs::exists(RecordsPath(o)) && !o.force) {
    std::fprintf(stderr, "%s exists; use --force to overwrite\n",
                 RecordsPath(o).c_str());
    return 2;
  }
  Require(WorldPath(o), "map");
  Require(MapPath(o), "map");
  WorldMap world = LoadWorld(WorldPath(o));
  std::vector<MissionConfig> trials = ExpandTrials(run, world);
  PointCloud map = ReadPcd(MapPath(o));
  MissionContext context;
  if (fs::exists(GraphPath(o))) {
    const VisibilityGraph graph = LoadGraph(GraphPath(o));
    context = MakeMissionContext(std::move(world), std::move(map), run.params,
                                 &graph);
  } else {
    std::fprintf(stderr, "note: %s not found; building the graph\n",
                 GraphPath(o).c_str());
    context = MakeMissionContext(std::move(world), std::move(map), run.params);
  }

  const fs::path trial_dir = fs::path(o.out) / "trials";
  fs::create_directories(trial_dir);
  std::vector<TrialRecord> records(trials.size());
  std::vector<ComputeTimes> compute(trials.size());
  std::atomic<std::size_t> next{0};
  std::mutex print_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < trials.size(); i = next++) {
      const MissionConfig& cfg = trials[i];
      TrialRecord rec;
      try {
        rec = RunTrial(context, cfg, &compute[i]);
      } catch (const std::exception& e) {
        rec = TrialRecord();
        rec.goal = cfg.goal_name;
        rec.seed = cfg.seed;
        rec.failure = std::string("crash: ") + e.what();
      }
      WriteFileAtomic(trial_dir / (cfg.goal_name + "_seed" +
                                   std::to_string(cfg.seed) + ".json"),
                      RecordToJson(rec) + "\n");
      std::lock_guard<std::mutex> lock(print_mutex);
      std::printf("%s seed %llu: %s  p=%.2f l=%.2f t=%.1fs final=%.2fm%s%s\n",
                  rec.goal.c_str(), static_cast<unsigned long long>(rec.seed),
                  rec.success ? "success" : "FAIL", rec.path_length,
                  rec.geodesic, rec.elapsed, rec.final_distance,
                  rec.failure.empty() ? "" : "  ", rec.failure.c_str());
      std::fflush(stdout);
      records[i] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  const int threads =
      std::min<int>(o.parallel, static_cast<int>(trials.size()));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::ostringstream jsonl;
  WriteJsonl(jsonl, records);
  WriteFileAtomic(RecordsPath(o), jsonl.str());
  std::ostringstream csv;
  WriteSummaryCsv(csv, SummarizeRecords(records));
  WriteFileAtomic(fs::path(o.out) / "summary.csv", csv.str());
  ComputeTimes merged;
  for (const ComputeTimes& c : compute) {
    for (const auto& [stage, values] : c.ms) {
      auto& dst = merged.ms[stage];
      dst.insert(dst.end(), values.begin(), values.end());
    }
  }
  WriteFileAtomic(fs::path(o.out) / "latency.json",
                  LatencyJson(records, &merged).dump(2) + "\n");
  PrintSummary(records);
  const bool all_ok = std::all_of(records.begin(), records.end(),
                                  [](const TrialRecord& r) { return r.success; });
  return all_ok ? 0 : 1;
}

int CmdEval(const Options& o) {
  Require(RecordsPath(o), "run");
  const std::vector<TrialRecord> records = ReadJsonl(RecordsPath(o));
  if (records.empty()) throw RecordsError("no trial records");
  PrintSummary(records);
  std::printf("SR %.2f  SPL %.3f\n", SuccessRate(records), Spl(records));
  for (const TrialRecord& r : records) {
    if (r.correction_steps.empty()) continue;
    const CorrectionStats c = ComputeCorrectionStats(r);
    std::printf("%s seed %llu: median correction step %.1f cm, max drift "
                "%.2f m\n",
                r.goal.c_str(), static_cast<unsigned long long>(r.seed),
                c.median_step * 100.0, c.max_drift);
  }
  const auto latency = LatencyJson(records, nullptr);
  std::printf("modeled end-to-end latency: median %.0f ms, mean %.0f ms\n",
              latency["end_to_end"]["median_ms"].get<double>(),
              latency["end_to_end"]["mean_ms"].get<double>());
  std::ostringstream csv;
  WriteSummaryCsv(csv, SummarizeRecords(records));
  WriteFileAtomic(fs::path(o.out) / "summary.csv", csv.str());
  return 0;
}

int CmdPlot(const Options& o) {
  Require(WorldPath(o), "map");
  const WorldMap world = LoadWorld(WorldPath(o));
  std::vector<TrialRecord> records;
  if (fs::exists(RecordsPath(o))) records = ReadJsonl(RecordsPath(o));
  if (records.empty()) {
    std::fprintf(stderr, "warning: no trial records; plotting the outline\n");
  }
  PlotOptions options;
  options.grid = o.grid;
  const fs::path path =
      fs::path(o.out) / (o.grid ? "paths_grid.svg" : "paths.svg");
  WriteFileAtomic(path, RenderSvg(world, records, options));
  std::printf("%zu trials -> %s\n", records.size(), path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine navigation: prior map, visibility graph, trials, "
               "evaluation and plots"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Run config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory")
        ->capture_default_str();
  };
  CLI::App* map = app.add_subcommand("map", "Generate the world and prior map");
  common(map);
  CLI::App* graph =
      app.add_subcommand("graph", "Build and save the visibility graph");
  common(graph);
  CLI::App* run = app.add_subcommand("run", "Run goal x seed trials");
  common(run);
  run->add_option("--seed", o.seeds, "Seeds to run (default: config)");
  run->add_option("--goal", o.goals, "Goals to run (default: all)");
  run->add_flag("--force", o.force, "Overwrite existing trial records");
  run->add_option("--timeout-s", o.timeout_s, "Per-trial timeout (s)")
      ->check(CLI::PositiveNumber);
  run->add_option("--parallel", o.parallel, "Trials run concurrently")
      ->check(CLI::PositiveNumber);
  CLI::App* eval = app.add_subcommand("eval", "Summarize trial records");
  common(eval);
  CLI::App* plot = app.add_subcommand("plot", "Write the paths SVG");
  common(plot);
  plot->add_flag("--grid", o.grid, "One panel per trial");
  for (CLI::App* cmd : {map, graph, eval, plot}) {
    cmd->add_flag("--force", o.force, "Overwrite outputs (always done)");
  }

  CLI11_PARSE(app, argc, argv);
  try {
    if (map->parsed()) return CmdMap(o);
    if (graph->parsed()) return CmdGraph(o);
    if (run->parsed()) return CmdRun(o);
    if (eval->parsed()) return CmdEval(o);
    if (plot->parsed()) return CmdPlot(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
