#include <doctest.h>

#include "mctrack/errors.hpp"
#include "mctrack/tracker.hpp"

using namespace mctrack;
using namespace mctrack::tracker;

namespace {

DetectionBox car_at(double x, double y, double score = 0.9, double vx = 10.0) {
  DetectionBox d;
  d.score = score;
  d.global_xyz = Vec3(x, y, 0.8);
  d.lwh = Vec3(4.5, 1.9, 1.6);
  d.global_velocity = Vec2(vx, 0.0);
  return d;
}

FrameRecord frame_at(int k, std::vector<DetectionBox> dets) {
  FrameRecord f;
  f.frame_index = k;
  f.timestamp = 0.1 * k;
  f.detections = std::move(dets);
  return f;
}

}  // namespace

TEST_CASE("preprocess drops low scores and suppresses same-category overlaps") {
  TrackerConfig cfg;
  DetectionBox ped = car_at(10.1, 0.0, 0.5);
  ped.category = "pedestrian";
  ped.lwh = Vec3(0.8, 0.6, 1.7);
  const std::vector<DetectionBox> dets{car_at(10.0, 0.0, 0.6), car_at(10.2, 0.0, 0.9),
                                       car_at(30.0, 0.0, 0.05), ped};
  const auto kept = preprocess(dets, cfg);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].score == 0.9);
  CHECK(kept[1].category == "pedestrian");
}

TEST_CASE("a steady object keeps one id and is confirmed after confirm_hits") {
  TrackerConfig cfg;
  TrackerState state;
  for (int k = 0; k < 10; ++k) {
    auto r = step(std::move(state), frame_at(k, {car_at(10.0 + k, 0.0)}), cfg);
    state = std::move(r.state);
    if (k == 0) {
      CHECK(r.boxes.empty());
    } else {
      REQUIRE(r.boxes.size() == 1);
      CHECK(r.boxes[0].track_id == 0);
      CHECK(r.boxes[0].state == LifecycleState::kConfirmed);
    }
  }
  CHECK(state.next_id == 1);
}

TEST_CASE("tracks die after max_misses consecutive misses") {
  TrackerConfig cfg;
  cfg.lifecycle.table.fallback.max_misses = 2;
  TrackerState state;
  for (int k = 0; k < 3; ++k) state = step(std::move(state), frame_at(k, {car_at(10.0 + k, 0.0)}), cfg).state;
  for (int k = 3; k < 5; ++k) {
    state = step(std::move(state), frame_at(k, {}), cfg).state;
    CHECK(state.tracks.size() == 1);
    CHECK(state.tracks[0].lifecycle_state == LifecycleState::kLost);
  }
  state = step(std::move(state), frame_at(5, {}), cfg).state;
  CHECK(state.tracks.empty());
}

TEST_CASE("a lost track that is matched again keeps its id") {
  TrackerConfig cfg;
  TrackerState state;
  std::vector<std::vector<TrackedBox>> out;
  for (int k = 0; k < 8; ++k) {
    std::vector<DetectionBox> dets;
    if (k != 4 && k != 5) dets.push_back(car_at(10.0 + k, 0.0));
    auto r = step(std::move(state), frame_at(k, dets), cfg);
    state = std::move(r.state);
    out.push_back(r.boxes);
  }
  CHECK(out[4].empty());
  REQUIRE(out[6].size() == 1);
  CHECK(out[6][0].track_id == 0);
}

TEST_CASE("coasted tracks are emitted on request") {
  TrackerConfig cfg;
  cfg.emit_coasted = true;
  TrackerState state;
  for (int k = 0; k < 3; ++k) state = step(std::move(state), frame_at(k, {car_at(10.0 + k, 0.0)}), cfg).state;
  const auto r = step(std::move(state), frame_at(3, {}), cfg);
  REQUIRE(r.boxes.size() == 1);
  CHECK(r.boxes[0].state == LifecycleState::kLost);
  // Coasting continues the motion.
  CHECK(r.boxes[0].box.global_xyz.x() == doctest::Approx(13.0).epsilon(0.02));
}

TEST_CASE("confirm_hits of one confirms at birth") {
  TrackerConfig cfg;
  cfg.lifecycle.table.fallback.confirm_hits = 1;
  const auto r = step(TrackerState{}, frame_at(0, {car_at(10.0, 0.0)}), cfg);
  CHECK(r.boxes.size() == 1);
}

TEST_CASE("timestamps must increase") {
  TrackerConfig cfg;
  TrackerState state = step(TrackerState{}, frame_at(1, {car_at(10.0, 0.0)}), cfg).state;
  CHECK_THROWS_AS(step(state, frame_at(1, {}), cfg), NonMonotonicTimestamp);
  CHECK_THROWS_AS(step(state, frame_at(0, {}), cfg), NonMonotonicTimestamp);
}

TEST_CASE("two crossing-free objects keep distinct ids") {
  TrackerConfig cfg;
  SceneRecord scene;
  for (int k = 0; k < 20; ++k) scene.frames.push_back(frame_at(k, {car_at(10.0 + k, 0.0), car_at(12.0 + k, 4.0)}));
  const auto out = run_scene(scene, cfg);
  for (int k = 1; k < 20; ++k) {
    REQUIRE(out[static_cast<std::size_t>(k)].size() == 2);
    CHECK(out[static_cast<std::size_t>(k)][0].track_id == 0);
    CHECK(out[static_cast<std::size_t>(k)][1].track_id == 1);
  }
}

TEST_CASE("config validation") {
  TrackerConfig cfg;
  cfg.lifecycle.table.fallback.spawn_threshold = 0.05;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  TrackerConfig ok;
  CHECK_NOTHROW(ok.validate());
}
