#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "minenav/visibility_graph.hpp"

namespace minenav {

// Malformed graph document. line() is 1-based, 0 when unknown; field() is
// the offending value's path such as "nodes[3].x".
class GraphFormatError : public std::runtime_error {
 public:
  GraphFormatError(const std::string& message, int line, std::string field);

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_ = 0;
  std::string field_;
};

// JSON document with params, nodes, edges, inflated polygons, the raw
// obstacle image (run-length encoded) and pending observation counts. One
// record per line; doubles are written with round-trip precision.
std::string SerializeGraph(const VisibilityGraph& graph);
VisibilityGraph ParseGraph(const std::string& text);

void SaveGraph(const std::filesystem::path& path, const VisibilityGraph& graph);
VisibilityGraph LoadGraph(const std::filesystem::path& path);

}  // namespace minenav
