#include "minenav/correction.hpp"

namespace minenav {

CorrectionState InitialCorrection(const RigidTransform& initial_map_from_base,
                                  const RigidTransform& odom_from_base,
                                  double stamp) {
  CorrectionState state;
  state.map_from_odom = initial_map_from_base * odom_from_base.Inverse();
  state.stamp = stamp;
  return state;
}

RigidTransform PredictPose(const CorrectionState& state,
                           const RigidTransform& odom_from_base) {
  return state.map_from_odom * odom_from_base;
}

CorrectionState UpdateCorrection(const CorrectionState& state,
                                 const RigidTransform& refined_map_from_base,
                                 const RigidTransform& odom_from_base,
                                 double stamp, double score) {
  CorrectionState next = state;
  next.map_from_odom = refined_map_from_base * odom_from_base.Inverse();
  next.stamp = stamp;
  next.score = score;
  next.converged = true;
  return next;
}

CorrectionCell::CorrectionCell(const CorrectionState& initial)
    : state_(std::make_shared<const CorrectionState>(initial)) {}

CorrectionState CorrectionCell::Load() const {
  return *std::atomic_load(&state_);
}

void CorrectionCell::Store(const CorrectionState& state) {
  std::atomic_store(&state_, std::make_shared<const CorrectionState>(state));
}

std::vector<StampedPose> CorrectedPoseStream(
    const CorrectionState& initial, const std::vector<CorrectionEvent>& events,
    const std::vector<StampedPose>& odometry) {
  std::vector<StampedPose> out;
  out.reserve(odometry.size());
  CorrectionState current = initial;
  std::size_t next_event = 0;
  for (const StampedPose& msg : odometry) {
    while (next_event < events.size() &&
           events[next_event].stamp <= msg.stamp) {
      current = events[next_event].state;
      ++next_event;
    }
    out.push_back({msg.stamp, PredictPose(current, msg.pose)});
  }
  return out;
}

}  // namespace minenav
