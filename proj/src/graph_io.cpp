#include "minenav/graph_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace minenav {

using nlohmann::json;

GraphFormatError::GraphFormatError(const std::string& message, int line,
                                   std::string field)
    : std::runtime_error(
          "graph file" + (line > 0 ? " line " + std::to_string(line) : "") +
          (field.empty() ? "" : " field '" + field + "'") + ": " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

constexpr const char* kFormat = "minenav-visibility-graph";
constexpr int kVersion = 1;

std::string KindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kConvexVertex:
      return "convex";
    case NodeKind::kStart:
      return "start";
    case NodeKind::kGoal:
      return "goal";
  }
  return "convex";
}

// Input iterator that counts consumed characters through a shared counter,
// so the parse callback can tell where each value sits.
struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  std::size_t* consumed = nullptr;

  reference operator*() const { return *p; }
  CountingIterator& operator++() {
    ++p;
    if (consumed) ++*consumed;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

// Records the source line of every value by its display path.
class LineTracker {
 public:
  explicit LineTracker(const std::string& text) : text_(text) {}

  std::size_t* counter() { return &consumed_; }

  bool OnEvent(json::parse_event_t event, const json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
      case json::parse_event_t::array_start:
        lines_[SlotPath()] = Line();
        stack_.push_back(
            {SlotPath(), event == json::parse_event_t::array_start, 0, ""});
        break;
      case json::parse_event_t::key:
        if (!stack_.empty()) stack_.back().key = parsed.get<std::string>();
        break;
      case json::parse_event_t::value:
        lines_[SlotPath()] = Line();
        Advance();
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!stack_.empty()) stack_.pop_back();
        Advance();
        break;
    }
    return true;
  }

  int LineOf(const std::string& path) const {
    auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

  int LineAtByte(std::size_t byte) const {
    byte = std::min(byte, text_.size());
    return 1 + static_cast<int>(
                   std::count(text_.begin(), text_.begin() + byte, '\n'));
  }

 private:
  struct Frame {
    std::string path;
    bool array = false;
    std::size_t index = 0;
    std::string key;
  };

  std::string SlotPath() const {
    if (stack_.empty()) return "";
    const Frame& f = stack_.back();
    if (f.array) return f.path + "[" + std::to_string(f.index) + "]";
    return f.path.empty() ? f.key : f.path + "." + f.key;
  }
  void Advance() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
  }
  int Line() const { return LineAtByte(consumed_ == 0 ? 0 : consumed_ - 1); }

  const std::string& text_;
  std::size_t consumed_ = 0;
  std::vector<Frame> stack_;
  std::map<std::string, int> lines_;
};

// Typed field access with path and line diagnostics.
class Reader {
 public:
  explicit Reader(const LineTracker& lines) : lines_(lines) {}

  [[noreturn]] void Fail(const std::string& path,
                         const std::string& message) const {
    throw GraphFormatError(message, lines_.LineOf(path), path);
  }

  const json& At(const json& parent, const std::string& parent_path,
                 const std::string& key) const {
    const std::string path = Join(parent_path, key);
    if (!parent.is_object()) Fail(parent_path, "expected an object");
    auto it = parent.find(key);
    if (it == parent.end()) Fail(path, "missing");
    return *it;
  }

  double Number(const json& j, const std::string& path) const {
    if (!j.is_number()) Fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) Fail(path, "expected a finite number");
    return v;
  }

  long long Integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) Fail(path, "expected an integer");
    return j.get<long long>();
  }

  bool Bool(const json& j, const std::string& path) const {
    if (!j.is_boolean()) Fail(path, "expected true or false");
    return j.get<bool>();
  }

  const json& Array(const json& j, const std::string& path,
                    std::size_t size = 0) const {
    if (!j.is_array()) Fail(path, "expected an array");
    if (size > 0 && j.size() != size) {
      Fail(path, "expected " + std::to_string(size) + " elements");
    }
    return j;
  }

  Eigen::Vector2d Xy(const json& j, const std::string& path) const {
    Array(j, path, 2);
    return {Number(j[0], path + "[0]"), Number(j[1], path + "[1]")};
  }

  static std::string Join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
  }
  static std::string Item(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
  }

 private:
  const LineTracker& lines_;
};

void WriteArray(std::ostringstream& out, const std::string& key,
                const std::vector<json>& items, bool last) {
  out << " \"" << key << "\": [";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << (i == 0 ? "\n  " : ",\n  ") << items[i].dump();
  }
  out << (items.empty() ? "]" : "\n ]") << (last ? "\n" : ",\n");
}

}  // namespace

std::string SerializeGraph(const VisibilityGraph& graph) {
  const PlannerParams& p = graph.params;
  const json params = {{"robot_radius", p.robot_radius},
                       {"resolution", p.resolution},
                       {"sensor_range", p.sensor_range},
                       {"replan_rate_hz", p.replan_rate_hz},
                       {"merge_tolerance", p.merge_tolerance},
                       {"min_observations", p.min_observations}};

  std::vector<json> nodes;
  for (const GraphNode& n : graph.nodes) {
    nodes.push_back({{"x", n.position.x()},
                     {"y", n.position.y()},
                     {"kind", KindName(n.kind)}});
  }
  std::vector<json> edges;
  for (const GraphEdge& e : graph.edges) edges.push_back({e.a, e.b, e.cost});
  std::vector<json> polygons;
  for (const ObstaclePolygon& poly : graph.polygons) {
    json verts = json::array();
    for (const Eigen::Vector2d& v : poly.vertices) verts.push_back({v.x(), v.y()});
    polygons.push_back({{"inflated", poly.inflated},
                        {"hole", poly.hole},
                        {"vertices", std::move(verts)}});
  }

  const OccupancyImage& img = graph.obstacles;
  json runs = json::array();
  const auto& cells = img.cells();
  for (std::size_t i = 0; i < cells.size();) {
    if (!cells[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cells.size() && cells[j]) ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  const json obstacles = {{"origin", {img.origin().x(), img.origin().y()}},
                          {"resolution", img.resolution()},
                          {"width", img.width()},
                          {"height", img.height()},
                          {"runs", std::move(runs)}};
  std::vector<json> pending;
  for (const auto& [key, count] : graph.pending) {
    pending.push_back({key.first, key.second, count});
  }

  std::ostringstream out;
  out << "{\n \"format\": " << json(kFormat).dump() << ",\n";
  out << " \"version\": " << kVersion << ",\n";
  out << " \"params\": " << params.dump() << ",\n";
  WriteArray(out, "nodes", nodes, false);
  WriteArray(out, "edges", edges, false);
  WriteArray(out, "polygons", polygons, false);
  out << " \"obstacles\": " << obstacles.dump() << ",\n";
  WriteArray(out, "pending", pending, true);
  out << "}\n";
  return out.str();
}

VisibilityGraph ParseGraph(const std::string& text) {
  LineTracker tracker(text);
  json doc;
  try {
    CountingIterator first{text.data(), tracker.counter()};
    CountingIterator last{text.data() + text.size(), nullptr};
    doc = json::parse(first, last,
                      [&tracker](int, json::parse_event_t event, json& parsed) {
                        return tracker.OnEvent(event, parsed);
                      });
  } catch (const json::parse_error& e) {
    throw GraphFormatError(e.what(), tracker.LineAtByte(e.byte > 0 ? e.byte - 1 : 0),
                           "");
  }

  const Reader r(tracker);
  if (!doc.is_object()) r.Fail("", "expected a JSON object");
  const json& format = r.At(doc, "", "format");
  if (!format.is_string() || format.get<std::string>() != kFormat) {
    r.Fail("format", std::string("expected \"") + kFormat + "\"");
  }
  if (r.Integer(r.At(doc, "", "version"), "version") != kVersion) {
    r.Fail("version", "unsupported version");
  }

  VisibilityGraph g;
  const json& params = r.At(doc, "", "params");
  g.params.robot_radius =
      r.Number(r.At(params, "params", "robot_radius"), "params.robot_radius");
  g.params.resolution =
      r.Number(r.At(params, "params", "resolution"), "params.resolution");
  g.params.sensor_range =
      r.Number(r.At(params, "params", "sensor_range"), "params.sensor_range");
  g.params.replan_rate_hz = r.Number(r.At(params, "params", "replan_rate_hz"),
                                     "params.replan_rate_hz");
  g.params.merge_tolerance = r.Number(
      r.At(params, "params", "merge_tolerance"), "params.merge_tolerance");
  g.params.min_observations = static_cast<int>(r.Integer(
      r.At(params, "params", "min_observations"), "params.min_observations"));
  try {
    g.params.Validate();
  } catch (const std::exception& e) {
    r.Fail("params", e.what());
  }

  const json& nodes = r.Array(r.At(doc, "", "nodes"), "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = Reader::Item("nodes", i);
    GraphNode n;
    n.position.x() = r.Number(r.At(nodes[i], path, "x"), path + ".x");
    n.position.y() = r.Number(r.At(nodes[i], path, "y"), path + ".y");
    const json& kind = r.At(nodes[i], path, "kind");
    const std::string kind_name = kind.is_string() ? kind.get<std::string>() : "";
    if (kind_name == "convex") {
      n.kind = NodeKind::kConvexVertex;
    } else if (kind_name == "start") {
      n.kind = NodeKind::kStart;
    } else if (kind_name == "goal") {
      n.kind = NodeKind::kGoal;
    } else {
      r.Fail(path + ".kind", "expected \"convex\", \"start\" or \"goal\"");
    }
    g.nodes.push_back(n);
  }

  const json& edges = r.Array(r.At(doc, "", "edges"), "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = Reader::Item("edges", i);
    r.Array(edges[i], path, 3);
    const long long a = r.Integer(edges[i][0], path + "[0]");
    const long long b = r.Integer(edges[i][1], path + "[1]");
    const double cost = r.Number(edges[i][2], path + "[2]");
    const auto n = static_cast<long long>(g.nodes.size());
    if (a < 0 || a >= n) r.Fail(path + "[0]", "node index out of range");
    if (b < 0 || b >= n) r.Fail(path + "[1]", "node index out of range");
    if (a >= b) r.Fail(path, "expected a < b");
    if (cost < 0.0) r.Fail(path + "[2]", "negative cost");
    g.edges.push_back({static_cast<int>(a), static_cast<int>(b), cost});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const GraphEdge& x, const GraphEdge& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });
  for (std::size_t i = 1; i < g.edges.size(); ++i) {
    if (g.edges[i].a == g.edges[i - 1].a && g.edges[i].b == g.edges[i - 1].b) {
      r.Fail("edges", "duplicate edge " + std::to_string(g.edges[i].a) + "-" +
                          std::to_string(g.edges[i].b));
    }
  }

  const json& polygons = r.Array(r.At(doc, "", "polygons"), "polygons");
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    const std::string path = Reader::Item("polygons", i);
    ObstaclePolygon poly;
    poly.inflated = r.Bool(r.At(polygons[i], path, "inflated"), path + ".inflated");
    poly.hole = r.Bool(r.At(polygons[i], path, "hole"), path + ".hole");
    const std::string vpath = path + ".vertices";
    const json& verts = r.Array(r.At(polygons[i], path, "vertices"), vpath);
    if (verts.size() < 3) r.Fail(vpath, "expected at least 3 vertices");
    for (std::size_t k = 0; k < verts.size(); ++k) {
      poly.vertices.push_back(r.Xy(verts[k], Reader::Item(vpath, k)));
    }
    g.polygons.push_back(std::move(poly));
  }

  const json& obs = r.At(doc, "", "obstacles");
  const Eigen::Vector2d origin =
      r.Xy(r.At(obs, "obstacles", "origin"), "obstacles.origin");
  const double res =
      r.Number(r.At(obs, "obstacles", "resolution"), "obstacles.resolution");
  if (!(res > 0.0)) r.Fail("obstacles.resolution", "expected > 0");
  const long long width =
      r.Integer(r.At(obs, "obstacles", "width"), "obstacles.width");
  const long long height =
      r.Integer(r.At(obs, "obstacles", "height"), "obstacles.height");
  if (width < 0) r.Fail("obstacles.width", "expected >= 0");
  if (height < 0) r.Fail("obstacles.height", "expected >= 0");
  g.obstacles = OccupancyImage(origin, res, static_cast<int>(width),
                               static_cast<int>(height));
  const json& runs = r.Array(r.At(obs, "obstacles", "runs"), "obstacles.runs");
  const long long total = width * height;
  auto& cells = g.obstacles.mutable_cells();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = Reader::Item("obstacles.runs", i);
    r.Array(runs[i], path, 2);
    const long long start = r.Integer(runs[i][0], path + "[0]");
    const long long len = r.Integer(runs[i][1], path + "[1]");
    if (start < 0 || len <= 0 || start + len > total) {
      r.Fail(path, "run outside the image");
    }
    std::fill(cells.begin() + start, cells.begin() + start + len, 1);
  }

  const json& pending = r.Array(r.At(doc, "", "pending"), "pending");
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const std::string path = Reader::Item("pending", i);
    r.Array(pending[i], path, 3);
    const long long kx = r.Integer(pending[i][0], path + "[0]");
    const long long ky = r.Integer(pending[i][1], path + "[1]");
    const long long count = r.Integer(pending[i][2], path + "[2]");
    if (count <= 0) r.Fail(path + "[2]", "expected a positive count");
    g.pending[{kx, ky}] = static_cast<int>(count);
  }

  g.index = std::make_shared<ObstacleIndex>(g.polygons);
  return g;
}

void SaveGraph(const std::filesystem::path& path, const VisibilityGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph: " + path.string());
  out << SerializeGraph(graph);
  if (!out) throw std::runtime_error("failed writing graph: " + path.string());
}

VisibilityGraph LoadGraph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseGraph(ss.str());
}

}  // namespace minenav
