#pragma once

#include <string>
#include <vector>

#include "minenav/trial.hpp"
#include "minenav/world.hpp"

namespace minenav {

struct PlotOptions {
  // One panel per trial, one row per goal, instead of a single overlay.
  bool grid = false;
  double pixels_per_metre = 12.0;
  double geodesic_clearance = 0.3;
};

// Static SVG with the wall outline, executed trajectories (solid), geodesic
// references (dashed), start/goal markers and p/l annotations.
std::string RenderSvg(const WorldMap& world,
                      const std::vector<TrialRecord>& records,
                      const PlotOptions& options = {});

}  // namespace minenav
