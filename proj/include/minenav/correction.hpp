#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "minenav/geometry.hpp"

namespace minenav {

// The single map <- odom correction maintained by the localizer.
struct CorrectionState {
  RigidTransform map_from_odom;
  double stamp = 0.0;
  double score = 0.0;
  bool converged = false;
};

CorrectionState InitialCorrection(const RigidTransform& initial_map_from_base,
                                  const RigidTransform& odom_from_base,
                                  double stamp = 0.0);

// map_from_base = map_from_odom * odom_from_base.
RigidTransform PredictPose(const CorrectionState& state,
                           const RigidTransform& odom_from_base);

// map_from_odom <- refined_map_from_base * odom_from_base^-1.
CorrectionState UpdateCorrection(const CorrectionState& state,
                                 const RigidTransform& refined_map_from_base,
                                 const RigidTransform& odom_from_base,
                                 double stamp, double score);

// Shared correction with whole-value replace semantics. Readers always see
// a complete transform; writers never block readers for longer than a
// pointer swap.
class CorrectionCell {
 public:
  explicit CorrectionCell(const CorrectionState& initial);

  CorrectionState Load() const;
  void Store(const CorrectionState& state);

 private:
  std::shared_ptr<const CorrectionState> state_;
};

struct StampedPose {
  double stamp = 0.0;
  RigidTransform pose;
};

struct CorrectionEvent {
  double stamp = 0.0;  // applies to messages with stamp >= this
  CorrectionState state;
};

// Maps an odometry stream through the correction in force at each message.
// `events` must be sorted by stamp; each message sees exactly one state.
std::vector<StampedPose> CorrectedPoseStream(
    const CorrectionState& initial, const std::vector<CorrectionEvent>& events,
    const std::vector<StampedPose>& odometry);

}  // namespace minenav
