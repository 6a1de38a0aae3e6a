#include "minenav/pcd_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace minenav {

void WritePcd(std::ostream& out, const PointCloud& cloud) {
  out << "# .PCD v0.7 - Point Cloud Data file format\n";
  out << "# frame " << FrameName(cloud.frame_id) << "\n";
  out << "# stamp " << std::setprecision(17) << cloud.stamp << "\n";
  out << "VERSION 0.7\n";
  out << "FIELDS x y z intensity\n";
  out << "SIZE 4 4 4 4\n";
  out << "TYPE F F F F\n";
  out << "COUNT 1 1 1 1\n";
  out << "WIDTH " << cloud.size() << "\n";
  out << "HEIGHT 1\n";
  out << "VIEWPOINT 0 0 0 1 0 0 0\n";
  out << "POINTS " << cloud.size() << "\n";
  out << "DATA ascii\n";
  out << std::setprecision(9);
  for (const Point& p : cloud.points) {
    out << p.x << ' ' << p.y << ' ' << p.z << ' ' << p.intensity << '\n';
  }
}

void WritePcd(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw PcdError("cannot open for writing: " + path.string());
  WritePcd(out, cloud);
  if (!out) throw PcdError("write failed: " + path.string());
}

namespace {

[[noreturn]] void Fail(int line, const std::string& what) {
  throw PcdError("pcd line " + std::to_string(line) + ": " + what);
}

}  // namespace

PointCloud ReadPcd(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  long long points = -1;
  long long width = -1;
  long long height = 1;
  bool have_fields = false;
  bool data_ascii = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "#") {
      std::string tag;
      ls >> tag;
      if (tag == "frame") {
        std::string name;
        ls >> name;
        try {
          cloud.frame_id = ParseFrame(name);
        } catch (const std::invalid_argument& e) {
          Fail(line_no, e.what());
        }
      } else if (tag == "stamp") {
        ls >> cloud.stamp;
      }
      continue;
    }
    if (key == "VERSION" || key == "SIZE" || key == "TYPE" ||
        key == "COUNT" || key == "VIEWPOINT") {
      continue;
    }
    if (key == "FIELDS") {
      std::vector<std::string> fields;
      for (std::string f; ls >> f;) fields.push_back(f);
      if (fields != std::vector<std::string>{"x", "y", "z", "intensity"}) {
        Fail(line_no, "FIELDS must be 'x y z intensity'");
      }
      have_fields = true;
    } else if (key == "WIDTH") {
      if (!(ls >> width) || width < 0) Fail(line_no, "bad WIDTH");
    } else if (key == "HEIGHT") {
      if (!(ls >> height) || height < 0) Fail(line_no, "bad HEIGHT");
    } else if (key == "POINTS") {
      if (!(ls >> points) || points < 0) Fail(line_no, "bad POINTS");
    } else if (key == "DATA") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") Fail(line_no, "only DATA ascii is supported");
      data_ascii = true;
      break;
    } else {
      Fail(line_no, "unknown header key '" + key + "'");
    }
  }
  if (!have_fields) Fail(line_no, "missing FIELDS");
  if (!data_ascii) Fail(line_no, "missing DATA line");
  if (points < 0) points = width * height;
  if (width >= 0 && width * height != points) {
    Fail(line_no, "WIDTH*HEIGHT disagrees with POINTS");
  }

  cloud.points.reserve(static_cast<std::size_t>(points));
  while (static_cast<long long>(cloud.points.size()) < points &&
         std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p.x >> p.y >> p.z >> p.intensity)) {
      Fail(line_no, "expected 4 numeric fields");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity)) {
      Fail(line_no, "non-finite value");
    }
    cloud.points.push_back(p);
  }
  if (static_cast<long long>(cloud.points.size()) != points) {
    Fail(line_no, "expected " + std::to_string(points) + " points, got " +
                      std::to_string(cloud.points.size()));
  }
  return cloud;
}

PointCloud ReadPcd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PcdError("cannot open: " + path.string());
  return ReadPcd(in);
}

}  // namespace minenav
