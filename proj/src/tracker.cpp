#include "mctrack/tracker.hpp"

#include "mctrack/errors.hpp"

#include <algorithm>
#include <numeric>

namespace mctrack::tracker {

void CategoryLifecycle::validate() const {
  if (confirm_hits < 1) throw ConfigError("confirm_hits must be >= 1");
  if (max_misses < 0) throw ConfigError("max_misses must be >= 0");
  const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(score_threshold) || !unit(spawn_threshold) || !unit(nms_iou_threshold)) {
    throw ConfigError("score, spawn and NMS thresholds must lie in [0, 1]");
  }
  if (spawn_threshold < score_threshold) {
    throw ConfigError("spawn_threshold must be >= score_threshold");
  }
}

LifecycleConfig LifecycleConfig::defaults() {
  LifecycleConfig cfg;
  cfg.table.fallback = CategoryLifecycle{};
  CategoryLifecycle vru;
  vru.max_misses = 2;
  for (const char* c : {"pedestrian", "bicycle", "motorcycle", "cyclist"}) cfg.table.set(c, vru);
  return cfg;
}

void TrackerConfig::validate() const {
  lifecycle.table.fallback.validate();
  for (const auto& [_, v] : lifecycle.table.overrides) v.validate();
  association.validate();
  noise.noise.fallback.validate();
  for (const auto& [_, v] : noise.noise.overrides) v.validate();
  if (!(noise.v_min >= 0.0)) throw ConfigError("v_min must be >= 0");
}

std::vector<DetectionBox> preprocess(std::span<const DetectionBox> dets, const TrackerConfig& cfg) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score >= cfg.lifecycle.at(dets[i].category).score_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<char> keep(dets.size(), 0);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const auto& cand = dets[i];
    const double limit = cfg.lifecycle.at(cand.category).nms_iou_threshold;
    const auto cand_box = geometry::box_from_detection(cand);
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return dets[k].category == cand.category &&
             geometry::ro_iou(geometry::box_from_detection(dets[k]), cand_box) > limit;
    });
    if (!suppressed) {
      kept.push_back(i);
      keep[i] = 1;
    }
  }
  std::vector<DetectionBox> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (keep[i]) out.push_back(dets[i]);
  }
  return out;
}

geometry::Box7 track_box(const Track& t) {
  const auto& p = t.filters.position.state;
  const auto& s = t.filters.size.state;
  return geometry::Box7{p(0),
                        p(1),
                        t.last_detection.global_xyz.z(),
                        s(0),
                        s(1),
                        t.last_detection.lwh.z(),
                        t.filters.heading.state(0)};
}

TrackedBox to_tracked_box(const Track& t) {
  const auto& p = t.filters.position.state;
  const geometry::Box7 b = track_box(t);
  TrackedBox out;
  out.track_id = t.track_id;
  out.state = t.lifecycle_state;
  out.box.score = t.last_detection.score;
  out.box.category = t.category;
  out.box.global_xyz = Vec3(b.x, b.y, b.z);
  out.box.lwh = Vec3(b.l, b.w, b.h);
  out.box.global_yaw = b.theta;
  out.box.global_orientation = yaw_to_quaternion(b.theta);
  out.box.global_velocity = Vec2(p(2), p(3));
  out.box.global_acceleration = Vec2(p(4), p(5));
  out.estimated_velocity = out.box.global_velocity;
  out.estimated_acceleration = out.box.global_acceleration;
  return out;
}

StepResult step(TrackerState state, const FrameRecord& frame, const TrackerConfig& cfg) {
  if (state.last_timestamp && !(frame.timestamp > *state.last_timestamp)) {
    throw NonMonotonicTimestamp("frame " + std::to_string(frame.frame_index) + " at t=" +
                                std::to_string(frame.timestamp) + " is not after t=" +
                                std::to_string(*state.last_timestamp));
  }
  const double v_min = cfg.noise.v_min;

  // Association sees the previous-frame posterior; the filters move on to now.
  std::vector<association::TrackSnapshot> snapshots;
  snapshots.reserve(state.tracks.size());
  for (auto& t : state.tracks) {
    const auto& p = t.filters.position.state;
    snapshots.push_back({t.track_id, t.category, track_box(t), Vec2(p(2), p(3)), t.state_time});
    t.filters = filters::predict(t.filters, frame.timestamp - t.state_time,
                                 cfg.noise.for_category(t.category));
    t.state_time = frame.timestamp;
  }

  const std::vector<DetectionBox> dets = preprocess(frame.detections, cfg);
  const association::MatchSet matches =
      association::two_stage_match(dets, snapshots, frame, cfg.association, cfg.rv_enabled);

  const auto find_track = [&](int id) {
    return std::find_if(state.tracks.begin(), state.tracks.end(),
                        [id](const Track& t) { return t.track_id == id; });
  };

  for (const auto& [det_idx, track_id] : matches.pairs) {
    Track& t = *find_track(track_id);
    const DetectionBox& det = dets[static_cast<std::size_t>(det_idx)];
    t.filters = filters::update(t.filters, det, cfg.noise.for_category(t.category), v_min);
    t.last_detection = det;
    t.last_update_time = frame.timestamp;
    ++t.hit_count;
    t.miss_count = 0;
    if (t.hit_count >= cfg.lifecycle.at(t.category).confirm_hits) {
      t.lifecycle_state = LifecycleState::kConfirmed;
    }
  }

  for (int id : matches.unmatched_tracks) {
    Track& t = *find_track(id);
    ++t.miss_count;
    if (t.lifecycle_state == LifecycleState::kConfirmed) t.lifecycle_state = LifecycleState::kLost;
  }
  std::erase_if(state.tracks, [&](const Track& t) {
    return t.miss_count > cfg.lifecycle.at(t.category).max_misses;
  });

  for (int det_idx : matches.unmatched_detections) {
    const DetectionBox& det = dets[static_cast<std::size_t>(det_idx)];
    const auto& life = cfg.lifecycle.at(det.category);
    if (det.score < life.spawn_threshold) continue;
    Track t;
    t.track_id = state.next_id++;
    t.category = det.category;
    t.filters = filters::init_from_detection(det, cfg.noise.for_category(det.category), v_min);
    t.lifecycle_state =
        life.confirm_hits <= 1 ? LifecycleState::kConfirmed : LifecycleState::kTentative;
    t.last_update_time = frame.timestamp;
    t.state_time = frame.timestamp;
    t.last_detection = det;
    state.tracks.push_back(std::move(t));
  }
  state.last_timestamp = frame.timestamp;

  StepResult out;
  for (const auto& t : state.tracks) {
    const bool fresh = t.lifecycle_state == LifecycleState::kConfirmed;
    const bool coasted = cfg.emit_coasted && t.lifecycle_state == LifecycleState::kLost;
    if (fresh || coasted) out.boxes.push_back(to_tracked_box(t));
  }
  std::sort(out.boxes.begin(), out.boxes.end(),
            [](const TrackedBox& a, const TrackedBox& b) { return a.track_id < b.track_id; });
  out.state = std::move(state);
  return out;
}

std::vector<std::vector<TrackedBox>> run_scene(const SceneRecord& scene, const TrackerConfig& cfg) {
  std::vector<std::vector<TrackedBox>> out;
  out.reserve(scene.frames.size());
  TrackerState state;
  for (const auto& frame : scene.frames) {
    StepResult r = step(std::move(state), frame, cfg);
    state = std::move(r.state);
    out.push_back(std::move(r.boxes));
  }
  return out;
}

}  // namespace mctrack::tracker
