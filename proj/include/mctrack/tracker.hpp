#pragma once

#include "mctrack/association.hpp"
#include "mctrack/category_table.hpp"
#include "mctrack/filters.hpp"
#include "mctrack/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mctrack::tracker {

struct CategoryLifecycle {
  int confirm_hits = 2;
  int max_misses = 3;
  double score_threshold = 0.1;
  // Minimum score for a detection to start a new track.
  double spawn_threshold = 0.1;
  double nms_iou_threshold = 0.5;

  void validate() const;
};

struct LifecycleConfig {
  CategoryTable<CategoryLifecycle> table;

  static LifecycleConfig defaults();
  const CategoryLifecycle& at(const std::string& c) const { return table.at(c); }
};

struct TrackerConfig {
  LifecycleConfig lifecycle = LifecycleConfig::defaults();
  association::AssocConfig association;
  filters::NoiseConfig noise = filters::NoiseConfig::defaults();
  bool rv_enabled = true;
  // Also emit confirmed tracks that were coasted (not matched) this frame.
  bool emit_coasted = false;

  void validate() const;
};

struct Track {
  int track_id = 0;
  std::string category;
  filters::FilterBank filters;
  LifecycleState lifecycle_state = LifecycleState::kTentative;
  int hit_count = 1;
  int miss_count = 0;
  double last_update_time = 0.0;
  // Time the filter state refers to (the last processed frame).
  double state_time = 0.0;
  DetectionBox last_detection;
};

struct TrackerState {
  std::vector<Track> tracks;
  int next_id = 0;
  std::optional<double> last_timestamp;
};

struct StepResult {
  TrackerState state;
  std::vector<TrackedBox> boxes;
};

/// Score filter, then per-category greedy NMS on rotated BEV IoU. Survivors
/// keep their input order.
std::vector<DetectionBox> preprocess(std::span<const DetectionBox> dets, const TrackerConfig& cfg);

/// Filtered box of a track (z and h from the last matched detection).
geometry::Box7 track_box(const Track& t);
TrackedBox to_tracked_box(const Track& t);

/// Advances the tracker by one frame. Throws NonMonotonicTimestamp when the
/// frame is not newer than the previous one.
StepResult step(TrackerState state, const FrameRecord& frame, const TrackerConfig& cfg);

std::vector<std::vector<TrackedBox>> run_scene(const SceneRecord& scene, const TrackerConfig& cfg);

}  // namespace mctrack::tracker
