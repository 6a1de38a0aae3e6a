#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "minenav/metrics.hpp"
#include "minenav/records_io.hpp"
#include "minenav/svg_plot.hpp"
#include "test_util.hpp"

namespace minenav {
namespace {

using Vec = Eigen::Vector2d;

TrialRecord Rec(bool success, double l, double p, std::string goal = "G1") {
  TrialRecord r;
  r.goal = std::move(goal);
  r.success = success;
  r.geodesic = l;
  r.path_length = p;
  r.elapsed = p / 0.45;
  return r;
}

// --- spl -----------------------------------------------------------------

TEST(Spl, Fixtures) {
  EXPECT_EQ(Spl({Rec(true, 10.0, 10.0)}), 1.0);
  EXPECT_EQ(Spl({Rec(false, 10.0, 12.0)}), 0.0);
  EXPECT_DOUBLE_EQ(Spl({Rec(true, 11.2, 13.0)}), 11.2 / 13.0);
  EXPECT_NEAR(Spl({Rec(true, 11.2, 13.0)}), 0.8615, 5e-5);
  EXPECT_DOUBLE_EQ(Spl({Rec(true, 10.0, 8.0), Rec(false, 5.0, 5.0),
                        Rec(true, 4.0, 5.0)}),
                   (1.0 + 0.0 + 0.8) / 3.0);
  EXPECT_THROW(Spl({}), MetricsError);
  EXPECT_THROW(Spl({Rec(true, 0.0, 1.0)}), MetricsError);
}

TEST(Spl, TableOneConsistency) {
  // p / l = 1.16 gives 1 / 1.16 = 0.862, within 0.87 +- 0.01 after rounding.
  const double spl = Spl({Rec(true, 11.2, 11.2 * 1.16)});
  EXPECT_NEAR(spl, 0.862, 5e-4);
  EXPECT_LE(std::abs(spl - 0.87), 0.01 + 0.005);
}

TEST(Spl, Bounds) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> l(0.5, 50.0), f(0.5, 3.0);
  std::bernoulli_distribution ok(0.7);
  for (int k = 0; k < 200; ++k) {
    std::vector<TrialRecord> rs;
    std::vector<TrialRecord> optimal;
    for (int i = 0; i < 10; ++i) {
      const double li = l(rng);
      const bool s = ok(rng);
      rs.push_back(Rec(s, li, li * f(rng)));
      optimal.push_back(Rec(s, li, li));
    }
    const double spl = Spl(rs);
    EXPECT_GE(spl, 0.0);
    EXPECT_LE(spl, 1.0);
    EXPECT_DOUBLE_EQ(Spl(optimal), SuccessRate(optimal));
  }
}

// --- path_length ---------------------------------------------------------

TEST(PathLength, Fixtures) {
  EXPECT_EQ(PathLength({{0, 1, 2, 0}}), 0.0);
  std::vector<TrajectorySample> line;
  for (int i = 0; i < 10; ++i) line.push_back({0.1 * i, 1.0 * i, 3.0, 0.0});
  EXPECT_DOUBLE_EQ(PathLength(line), 9.0);
  std::vector<TrajectorySample> arc;
  for (int deg = 0; deg <= 90; ++deg) {
    const double a = DegToRad(deg);
    arc.push_back({0.0, 2.0 * std::cos(a), 2.0 * std::sin(a), 0.0});
  }
  EXPECT_LE(std::abs(PathLength(arc) - kPi) / kPi, 1e-3);
}

// --- geodesic_distance ---------------------------------------------------

TEST(Geodesic, StartEqualsGoal) {
  const WorldMap w = GenerateWorld(testing::StraightCorridorSpec(20.0, 3.0));
  const double cy = w.height_m() / 2.0;
  EXPECT_EQ(GeodesicDistance(w, {10.0, cy}, {10.0, cy}, 0.3), 0.0);
}

TEST(Geodesic, StraightCorridor) {
  const WorldMap w = GenerateWorld(testing::StraightCorridorSpec(21.0, 3.0));
  const double cy = w.height_m() / 2.0;
  const double d = GeodesicDistance(w, {2.5, cy}, {22.5, cy}, 0.3);
  EXPECT_LE(std::abs(d - 20.0) / 20.0, 0.02);
}

// Taut string from p to g hugging a circle (c, r) that lies on its left.
double TautAroundCircle(const Vec& p, const Vec& g, const Vec& c, double r) {
  auto rot = [](const Vec& v, double a) {
    return Vec(std::cos(a) * v.x() - std::sin(a) * v.y(),
               std::sin(a) * v.x() + std::cos(a) * v.y());
  };
  const Vec dp = c - p;
  const double tp = std::sqrt(dp.squaredNorm() - r * r);
  const Vec t1 = p + tp * rot(dp.normalized(), -std::asin(r / dp.norm()));
  const Vec dg = c - g;
  const double tg = std::sqrt(dg.squaredNorm() - r * r);
  const Vec t2 = g + tg * rot(dg.normalized(), std::asin(r / dg.norm()));
  const Vec a = t1 - c;
  const Vec b = t2 - c;
  const double angle = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  return tp + tg + r * std::abs(angle);
}

TEST(Geodesic, LCorridorTautString) {
  WorldSpec spec;
  spec.width_m = 17.0;
  spec.height_m = 17.0;
  CorridorSegment seg;
  seg.polyline = {{3.0, 3.0}, {13.0, 3.0}, {13.0, 13.0}};
  seg.width = 3.0;
  spec.segments.push_back(seg);
  const WorldMap w = GenerateWorld(spec);
  const double clearance = 0.3;
  // The inner corner sits at (11.5, 4.5); clearance rounds it to a circle.
  const Vec corner(11.5, 4.5);
  // Legs close to the grid axes: the 8-connected metric is near exact.
  const Vec start(3.5, 4.0), goal(12.0, 12.5);
  const double oracle = TautAroundCircle(start, goal, corner, clearance);
  const double d = GeodesicDistance(w, start, goal, clearance);
  EXPECT_LE(std::abs(d - oracle) / oracle, 0.03) << d << " vs " << oracle;
  // Oblique legs: never shorter than the continuous path, and no longer than
  // the 8-connected worst case 1 / cos(22.5 deg) plus a cell per endpoint.
  const Vec far_start(3.5, 3.0), far_goal(13.0, 12.5);
  const double oblique = TautAroundCircle(far_start, far_goal, corner, clearance);
  const double od = GeodesicDistance(w, far_start, far_goal, clearance);
  EXPECT_GE(od, oblique - 2.0 * w.resolution());
  EXPECT_LE(od, oblique / std::cos(kPi / 8.0) + 2.0 * w.resolution());
  const std::vector<Vec> path = GeodesicPath(w, start, goal, clearance);
  ASSERT_GE(path.size(), 2u);
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  EXPECT_NEAR(len, d, 0.2);
}

TEST(Geodesic, Errors) {
  WorldSpec spec;
  spec.width_m = 30.0;
  spec.height_m = 8.0;
  CorridorSegment a;
  a.polyline = {{3.0, 4.0}, {10.0, 4.0}};
  CorridorSegment b;
  b.polyline = {{15.0, 4.0}, {27.0, 4.0}};
  spec.segments = {a, b};
  const WorldMap w = GenerateWorld(spec);
  EXPECT_THROW(GeodesicDistance(w, {5.0, 4.0}, {20.0, 4.0}, 0.3), MetricsError);
  EXPECT_THROW(GeodesicDistance(w, {5.0, 5.45}, {8.0, 4.0}, 0.3), MetricsError);
  EXPECT_THROW(GeodesicDistance(w, {12.0, 4.0}, {8.0, 4.0}, 0.3), MetricsError);
}

// --- latency_report ------------------------------------------------------

LatencyTrace ConstantTrace(std::uint64_t i, double stage_ms) {
  LatencyTrace t;
  t.scan_index = i;
  t.scan_stamp = 0.1 * i;
  double s = t.scan_stamp;
  for (const std::string& name : CriticalStages()) {
    t.stages.push_back({name, s, s + stage_ms * 1e-3});
    s += stage_ms * 1e-3;
  }
  t.command_stamp = s;
  return t;
}

TEST(Latency, ConstantStages) {
  std::vector<LatencyTrace> traces;
  for (int i = 0; i < 20; ++i) traces.push_back(ConstantTrace(i, 10.0));
  const LatencyReport r = MakeLatencyReport(traces);
  EXPECT_NEAR(r.end_to_end.median, 50.0, 1e-9);
  EXPECT_NEAR(r.end_to_end.mean, 50.0, 1e-9);
  ASSERT_EQ(r.stages.size(), 5u);
  for (const auto& [name, s] : r.stages) {
    EXPECT_NEAR(s.median, 10.0, 1e-9) << name;
    EXPECT_EQ(s.count, 20u);
  }
}

TEST(Latency, LocalizationOutlierOffCriticalPath) {
  std::vector<LatencyTrace> traces;
  std::vector<LocalizationSample> loc;
  for (int i = 0; i < 100; ++i) {
    traces.push_back(ConstantTrace(i, 10.0 + 0.01 * i));
    loc.push_back({static_cast<std::uint64_t>(i), 0.1 * i, 0.1 * i + 0.12, true});
  }
  const double base = MakeLatencyReport(traces, loc).end_to_end.median;
  loc[50].done_stamp = loc[50].scan_stamp + 1.0;
  const LatencyReport r = MakeLatencyReport(traces, loc);
  EXPECT_EQ(r.end_to_end.median, base);
  EXPECT_NEAR(r.localization.median, 120.0, 1e-6);
  EXPECT_NEAR(r.localization.mean, (99 * 120.0 + 1000.0) / 100.0, 1e-6);
  EXPECT_EQ(r.stages.count("localization"), 0u);
}

TEST(Latency, MissingStageOmitted) {
  std::vector<LatencyTrace> traces = {ConstantTrace(0, 10.0), ConstantTrace(1, 10.0)};
  for (LatencyTrace& t : traces) {
    t.stages.erase(std::remove_if(t.stages.begin(), t.stages.end(),
                                  [](const StageSpan& s) { return s.stage == "terrain"; }),
                   t.stages.end());
  }
  const LatencyReport r = MakeLatencyReport(traces);
  EXPECT_EQ(r.stages.count("terrain"), 0u);
  EXPECT_EQ(r.stages.size(), 4u);
}

TEST(Latency, PercentilesInterpolate) {
  std::vector<double> v;
  for (int i = 1; i <= 101; ++i) v.push_back(i);
  const StageStats s = Summarize(v);
  EXPECT_EQ(s.count, 101u);
  EXPECT_DOUBLE_EQ(s.median, 51.0);
  EXPECT_DOUBLE_EQ(s.p95, 96.0);
  EXPECT_DOUBLE_EQ(s.mean, 51.0);
  EXPECT_DOUBLE_EQ(Summarize({1.0, 2.0}).median, 1.5);
}

// --- correction_stats ----------------------------------------------------

TEST(CorrectionStats, Fixtures) {
  TrialRecord constant;
  constant.correction_steps = {0.0, 0.0, 0.0};
  constant.correction_offsets = {0.0, 0.0, 0.0};
  EXPECT_EQ(ComputeCorrectionStats(constant).median_step, 0.0);
  EXPECT_EQ(ComputeCorrectionStats(constant).max_drift, 0.0);

  TrialRecord scripted;
  scripted.correction_steps = {0.01, 0.01, 0.03};
  scripted.correction_offsets = {0.01, 0.02, 0.05};
  EXPECT_DOUBLE_EQ(ComputeCorrectionStats(scripted).median_step, 0.01);
  EXPECT_DOUBLE_EQ(ComputeCorrectionStats(scripted).max_drift, 0.05);

  EXPECT_THROW(ComputeCorrectionStats(TrialRecord{}), MetricsError);
}

// --- records I/O ---------------------------------------------------------

TrialRecord FullRecord() {
  TrialRecord r = Rec(true, 11.1, 12.3);
  r.seed = 4;
  r.failure = "";
  r.start_x = 5.0;
  r.start_y = 8.0;
  r.goal_x = 16.2;
  r.goal_y = 8.0;
  r.elapsed = 27.31;
  r.final_distance = 0.27;
  r.final_estimate_error = 0.004;
  r.correction_steps = {0.011, 0.009};
  r.correction_offsets = {0.1, 0.2};
  LatencyTrace t = ConstantTrace(3, 10.0);
  t.v = 0.5;
  t.omega = -0.1;
  r.traces = {t};
  r.localization_samples = {{3, 0.3, 0.42, true}, {5, 0.5, 0.62, false}};
  r.trajectory = {{0.0, 5.0, 8.0, 0.0}, {0.1, 5.05, 8.0, 0.01}};
  return r;
}

TEST(RecordsIo, JsonRoundTrip) {
  const TrialRecord r = FullRecord();
  const std::string line = RecordToJson(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const TrialRecord back = RecordFromJson(line);
  EXPECT_EQ(RecordToJson(back), line);
  EXPECT_EQ(back.seed, 4u);
  EXPECT_EQ(back.traces.size(), 1u);
  EXPECT_EQ(back.traces[0].stages.size(), 5u);
  EXPECT_EQ(back.localization_samples[1].converged, false);
  EXPECT_EQ(back.trajectory[1].x, 5.05);
}

TEST(RecordsIo, JsonlAndErrors) {
  std::stringstream ss;
  WriteJsonl(ss, {FullRecord(), Rec(false, 3.0, 1.0, "G2")});
  std::istringstream in(ss.str());
  const std::vector<TrialRecord> back = ReadJsonl(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].goal, "G2");

  std::istringstream bad(RecordToJson(FullRecord()) + "\n{\"goal\": 3}\n");
  try {
    ReadJsonl(bad);
    FAIL() << "expected RecordsError";
  } catch (const RecordsError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(RecordsIo, SummaryRowsMatchOracle) {
  const std::vector<TrialRecord> rs = {Rec(true, 10.0, 11.0, "G1"),
                                       Rec(true, 10.0, 13.0, "G1"),
                                       Rec(false, 20.0, 25.0, "G2"),
                                       Rec(true, 20.0, 22.0, "G2")};
  const std::vector<SummaryRow> rows = SummarizeRecords(rs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].goal, "G1");
  EXPECT_EQ(rows[0].successes, 2);
  EXPECT_DOUBLE_EQ(rows[0].path.mean, 12.0);
  EXPECT_DOUBLE_EQ(rows[0].path.std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(rows[0].ratio.mean, 1.2);
  EXPECT_DOUBLE_EQ(rows[0].spl.mean, (10.0 / 11.0 + 10.0 / 13.0) / 2.0);
  EXPECT_EQ(rows[1].successes, 1);
  EXPECT_DOUBLE_EQ(rows[1].spl.mean, (0.0 + 20.0 / 22.0) / 2.0);
  EXPECT_EQ(rows[2].goal, "All");
  EXPECT_EQ(rows[2].trials, 4);
  EXPECT_EQ(rows[2].successes, 3);
  EXPECT_DOUBLE_EQ(rows[2].path.mean, (12.0 + 23.5) / 2.0);

  std::ostringstream csv;
  WriteSummaryCsv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "goal,successes,trials,path_m_mean,path_m_std,ratio_mean,ratio_std,"
            "spl_mean,spl_std,time_s_mean,time_s_std");
  int n = 0;
  for (std::string l; std::getline(lines, l);) ++n;
  EXPECT_EQ(n, 3);
}

TEST(RecordsIo, AtomicWrite) {
  const auto path = std::filesystem::temp_directory_path() / "minenav_atomic.txt";
  WriteFileAtomic(path, "first");
  WriteFileAtomic(path, "second");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

// --- svg -----------------------------------------------------------------

int Count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos;
       p = text.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

double Attr(const std::string& svg, const std::string& name) {
  const std::regex re(name + "=\"([0-9.]+)\"");
  std::smatch m;
  EXPECT_TRUE(std::regex_search(svg, m, re));
  return std::stod(m[1]);
}

TrialRecord PlotRecord(const std::string& goal, std::uint64_t seed) {
  TrialRecord r = Rec(true, 4.0, 4.2, goal);
  r.seed = seed;
  r.start_x = 5.0;
  r.start_y = 8.0;
  r.goal_x = 9.0;
  r.goal_y = 8.0;
  r.trajectory = {{0, 5.0, 8.0, 0}, {1, 7.0, 8.1, 0}, {2, 9.0, 8.0, 0}};
  return r;
}

TEST(Svg, OneTrial) {
  const WorldMap w = GenerateWorld(testing::MineSpec());
  const std::string svg = RenderSvg(w, {PlotRecord("G1", 1)});
  EXPECT_EQ(Count(svg, "class=\"executed\""), 1);
  EXPECT_EQ(Count(svg, "class=\"geodesic\""), 1);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_EQ(Count(svg, "class=\"start\""), 1);
  EXPECT_EQ(Count(svg, "class=\"goal\""), 1);
  EXPECT_NE(svg.find("p/l="), std::string::npos);
}

TEST(Svg, EmptyIsOutlineOnly) {
  const WorldMap w = GenerateWorld(testing::MineSpec());
  const std::string svg = RenderSvg(w, {});
  EXPECT_EQ(Count(svg, "class=\"outline\""), 1);
  EXPECT_EQ(Count(svg, "<polyline"), 0);
}

TEST(Svg, GridLayout) {
  const WorldMap w = GenerateWorld(testing::MineSpec());
  PlotOptions grid;
  grid.grid = true;
  std::vector<TrialRecord> twenty, four, one = {PlotRecord("G1", 1)};
  for (int g = 1; g <= 4; ++g) {
    for (int s = 1; s <= 5; ++s) {
      twenty.push_back(PlotRecord("G" + std::to_string(g), s));
      if (g <= 2 && s <= 2) four.push_back(PlotRecord("G" + std::to_string(g), s));
    }
  }
  const std::string svg20 = RenderSvg(w, twenty, grid);
  EXPECT_EQ(Count(svg20, "class=\"panel\""), 20);
  EXPECT_EQ(Count(svg20, "class=\"executed\""), 20);
  const std::string svg1 = RenderSvg(w, one, grid);
  const std::string svg4 = RenderSvg(w, four, grid);
  const double cell_w = Attr(svg4, "width") - Attr(svg1, "width");
  const double cell_h = Attr(svg4, "height") - Attr(svg1, "height");
  EXPECT_NEAR(Attr(svg20, "width"), Attr(svg1, "width") + 4 * cell_w, 1e-6);
  EXPECT_NEAR(Attr(svg20, "height"), Attr(svg1, "height") + 3 * cell_h, 1e-6);
}

}  // namespace
}  // namespace minenav
