#include "minenav/records_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace minenav {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json StagesToJson(const std::vector<StageSpan>& stages) {
  ordered_json out = ordered_json::array();
  for (const StageSpan& s : stages) out.push_back({s.stage, s.enter, s.exit});
  return out;
}

template <typename T>
T Get(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordsError(std::string("missing field '") + key + "'");
  return it->get<T>();
}

}  // namespace

std::string RecordToJson(const TrialRecord& r) {
  ordered_json j;
  j["goal"] = r.goal;
  j["seed"] = r.seed;
  j["success"] = r.success;
  j["contact"] = r.contact;
  j["timed_out"] = r.timed_out;
  j["localization"] = r.localization;
  j["failure"] = r.failure;
  j["start"] = {r.start_x, r.start_y};
  j["goal_position"] = {r.goal_x, r.goal_y};
  j["path_length"] = r.path_length;
  j["geodesic"] = r.geodesic;
  j["elapsed"] = r.elapsed;
  j["final_distance"] = r.final_distance;
  j["final_estimate_error"] = r.final_estimate_error;
  j["correction_steps"] = r.correction_steps;
  j["correction_offsets"] = r.correction_offsets;
  ordered_json traces = ordered_json::array();
  for (const LatencyTrace& t : r.traces) {
    traces.push_back({{"scan", t.scan_index},
                      {"scan_stamp", t.scan_stamp},
                      {"stages", StagesToJson(t.stages)},
                      {"command_stamp", t.command_stamp},
                      {"v", t.v},
                      {"omega", t.omega}});
  }
  j["traces"] = std::move(traces);
  ordered_json loc = ordered_json::array();
  for (const LocalizationSample& s : r.localization_samples) {
    loc.push_back({s.scan_index, s.scan_stamp, s.done_stamp, s.converged});
  }
  j["localization_samples"] = std::move(loc);
  ordered_json traj = ordered_json::array();
  for (const TrajectorySample& s : r.trajectory) {
    traj.push_back({s.t, s.x, s.y, s.yaw});
  }
  j["trajectory"] = std::move(traj);
  return j.dump();
}

TrialRecord RecordFromJson(const std::string& line) {
  try {
    const ordered_json j = ordered_json::parse(line);
    TrialRecord r;
    r.goal = Get<std::string>(j, "goal");
    r.seed = Get<std::uint64_t>(j, "seed");
    r.success = Get<bool>(j, "success");
    r.contact = Get<bool>(j, "contact");
    r.timed_out = Get<bool>(j, "timed_out");
    r.localization = Get<bool>(j, "localization");
    r.failure = Get<std::string>(j, "failure");
    const auto start = Get<std::vector<double>>(j, "start");
    const auto goal = Get<std::vector<double>>(j, "goal_position");
    if (start.size() != 2 || goal.size() != 2) {
      throw RecordsError("start and goal_position must be [x, y]");
    }
    r.start_x = start[0];
    r.start_y = start[1];
    r.goal_x = goal[0];
    r.goal_y = goal[1];
    r.path_length = Get<double>(j, "path_length");
    r.geodesic = Get<double>(j, "geodesic");
    r.elapsed = Get<double>(j, "elapsed");
    r.final_distance = Get<double>(j, "final_distance");
    r.final_estimate_error = Get<double>(j, "final_estimate_error");
    r.correction_steps = Get<std::vector<double>>(j, "correction_steps");
    r.correction_offsets = Get<std::vector<double>>(j, "correction_offsets");
    for (const ordered_json& t : j.at("traces")) {
      LatencyTrace trace;
      trace.scan_index = t.at("scan").get<std::uint64_t>();
      trace.scan_stamp = t.at("scan_stamp").get<double>();
      for (const ordered_json& s : t.at("stages")) {
        trace.stages.push_back({s.at(0).get<std::string>(),
                                s.at(1).get<double>(), s.at(2).get<double>()});
      }
      trace.command_stamp = t.at("command_stamp").get<double>();
      trace.v = t.at("v").get<double>();
      trace.omega = t.at("omega").get<double>();
      r.traces.push_back(std::move(trace));
    }
    for (const ordered_json& s : j.at("localization_samples")) {
      r.localization_samples.push_back(
          {s.at(0).get<std::uint64_t>(), s.at(1).get<double>(),
           s.at(2).get<double>(), s.at(3).get<bool>()});
    }
    for (const ordered_json& s : j.at("trajectory")) {
      r.trajectory.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                              s.at(2).get<double>(), s.at(3).get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw RecordsError(std::string("trial record: ") + e.what());
  }
}

void WriteJsonl(std::ostream& out, const std::vector<TrialRecord>& records) {
  for (const TrialRecord& r : records) out << RecordToJson(r) << '\n';
}

std::vector<TrialRecord> ReadJsonl(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(RecordFromJson(line));
    } catch (const RecordsError& e) {
      throw RecordsError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return records;
}

std::vector<TrialRecord> ReadJsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RecordsError("cannot open records: " + path.string());
  return ReadJsonl(in);
}

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RecordsError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw RecordsError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MeanStd ComputeMeanStd(const std::vector<double>& values) {
  MeanStd m;
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / (values.size() - 1));
  }
  return m;
}

std::vector<SummaryRow> SummarizeRecords(
    const std::vector<TrialRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) {
    if (!groups.count(r.goal)) order.push_back(r.goal);
    groups[r.goal].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  SummaryRow all;
  all.goal = "All";
  std::vector<double> path_means, ratio_means, spl_means, time_means;
  for (const std::string& goal : order) {
    SummaryRow row;
    row.goal = goal;
    std::vector<double> path, ratio, spl, time;
    for (const TrialRecord* r : groups[goal]) {
      ++row.trials;
      row.successes += r->success ? 1 : 0;
      path.push_back(r->path_length);
      time.push_back(r->elapsed);
      if (r->geodesic > 0.0) {
        ratio.push_back(r->path_length / r->geodesic);
        spl.push_back(r->success ? r->geodesic /
                                       std::max(r->path_length, r->geodesic)
                                 : 0.0);
      }
    }
    row.path = ComputeMeanStd(path);
    row.ratio = ComputeMeanStd(ratio);
    row.spl = ComputeMeanStd(spl);
    row.time = ComputeMeanStd(time);
    all.trials += row.trials;
    all.successes += row.successes;
    path_means.push_back(row.path.mean);
    if (!ratio.empty()) ratio_means.push_back(row.ratio.mean);
    if (!spl.empty()) spl_means.push_back(row.spl.mean);
    time_means.push_back(row.time.mean);
    rows.push_back(row);
  }
  all.path = ComputeMeanStd(path_means);
  all.ratio = ComputeMeanStd(ratio_means);
  all.spl = ComputeMeanStd(spl_means);
  all.time = ComputeMeanStd(time_means);
  rows.push_back(all);
  return rows;
}

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "goal,successes,trials,path_m_mean,path_m_std,ratio_mean,ratio_std,"
         "spl_mean,spl_std,time_s_mean,time_s_std\n";
  out << std::fixed;
  for (const SummaryRow& r : rows) {
    out << r.goal << ',' << r.successes << ',' << r.trials << ','
        << std::setprecision(2) << r.path.mean << ',' << r.path.std << ','
        << std::setprecision(3) << r.ratio.mean << ',' << r.ratio.std << ','
        << r.spl.mean << ',' << r.spl.std << ',' << std::setprecision(1)
        << r.time.mean << ',' << r.time.std << '\n';
  }
}

}  // namespace minenav
