#include "roweisposes/pose.hpp"

#include <algorithm>
#include <cmath>

namespace roweisposes {

void WindowingConfig::validate() const {
  if (window_size < 1) throw ConfigError("windowing: window_size must be >= 1");
  if (!(distance_threshold > 0.0)) {
    throw ConfigError("windowing: distance_threshold must be positive");
  }
  if (min_keep_per_window < 1 || min_keep_per_window > window_size) {
    throw ConfigError(
        "windowing: min_keep_per_window must lie in [1, window_size]");
  }
}

PoseDecision recognize_pose(const RdaModel& model, const Vector& x,
                            long frame_index) {
  const Vector projected = project(model, x);
  int best = 0;
  double best_dist = (projected - model.projected_class_means.col(0)).norm();
  for (int j = 1; j < model.n_classes(); ++j) {
    const double dist =
        (projected - model.projected_class_means.col(j)).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return PoseDecision{model.pose_alphabet[best], best_dist, frame_index};
}

std::vector<PoseDecision> recognize_sequence(const RdaModel& model,
                                             const Sequence& seq) {
  std::vector<PoseDecision> out;
  out.reserve(seq.frames.size());
  for (const Frame& f : seq.frames) {
    out.push_back(recognize_pose(model, vectorize(f), f.timestamp_index));
  }
  return out;
}

std::vector<PoseDecision> window_filter(
    const std::vector<PoseDecision>& decisions, const WindowingConfig& cfg,
    const std::map<std::string, double>& class_thresholds) {
  cfg.validate();
  const auto threshold_for = [&](const PoseDecision& d) {
    const auto it = class_thresholds.find(d.pose);
    return it != class_thresholds.end() ? it->second : cfg.distance_threshold;
  };

  std::vector<PoseDecision> out;
  out.reserve(decisions.size());
  const size_t n = decisions.size();
  for (size_t w = 0; w < n; w += cfg.window_size) {
    const size_t end = std::min(n, w + cfg.window_size);
    std::vector<size_t> kept;
    std::vector<size_t> dropped;
    for (size_t i = w; i < end; ++i) {
      if (decisions[i].distance > threshold_for(decisions[i])) {
        dropped.push_back(i);
      } else {
        kept.push_back(i);
      }
    }
    const size_t need =
        std::min<size_t>(cfg.min_keep_per_window, end - w);
    if (kept.size() < need) {
      // Put back the lowest-distance dropped frames (earliest on ties).
      std::stable_sort(dropped.begin(), dropped.end(),
                       [&](size_t a, size_t b) {
                         return decisions[a].distance < decisions[b].distance;
                       });
      for (size_t k = 0; kept.size() < need; ++k) kept.push_back(dropped[k]);
      std::sort(kept.begin(), kept.end());
    }
    for (size_t i : kept) out.push_back(decisions[i]);
  }
  return out;
}

std::map<std::string, double> per_class_distance_quantile(
    const std::vector<PoseDecision>& decisions, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw ConfigError("quantile must lie in (0, 1]");
  }
  std::map<std::string, std::vector<double>> per_class;
  for (const auto& d : decisions) per_class[d.pose].push_back(d.distance);
  std::map<std::string, double> out;
  for (auto& [pose, dists] : per_class) {
    std::sort(dists.begin(), dists.end());
    const auto n = dists.size();
    size_t rank = static_cast<size_t>(std::ceil(quantile * n));
    rank = std::min(std::max<size_t>(rank, 1), n);
    out[pose] = dists[rank - 1];
  }
  return out;
}

}  // namespace roweisposes
