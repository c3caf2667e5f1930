#pragma once

#include <map>
#include <string>
#include <vector>

#include "roweisposes/rda.hpp"
#include "roweisposes/skeleton.hpp"

namespace roweisposes {

struct PoseDecision {
  std::string pose;
  double distance = 0.0;  // l2 norm to the nearest projected class mean
  long frame_index = 0;
};

struct WindowingConfig {
  int window_size = 5;
  double distance_threshold = 3.0;
  int min_keep_per_window = 1;

  void validate() const;  // ConfigError
};

// Nearest projected class mean; ties go to the first pose in alphabet order.
PoseDecision recognize_pose(const RdaModel& model, const Vector& x,
                            long frame_index = 0);

// recognize_pose over every frame of an already preprocessed sequence.
std::vector<PoseDecision> recognize_sequence(const RdaModel& model,
                                             const Sequence& seq);

// Splits the stream into consecutive windows of window_size. Within each
// window frames whose distance exceeds the threshold are dropped, but the
// lowest-distance dropped frames are put back until at least
// min(min_keep_per_window, window length) frames survive. Order is kept.
// class_thresholds, when non-empty, overrides the uniform threshold per
// recognized pose.
std::vector<PoseDecision> window_filter(
    const std::vector<PoseDecision>& decisions, const WindowingConfig& cfg,
    const std::map<std::string, double>& class_thresholds = {});

// Per-class nearest-rank quantile of recognition distances; used to
// calibrate windowing thresholds from training data.
std::map<std::string, double> per_class_distance_quantile(
    const std::vector<PoseDecision>& decisions, double quantile);

}  // namespace roweisposes
