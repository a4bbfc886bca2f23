#include <doctest.h>

#include "mctrack/baseversion_io.hpp"
#include "mctrack/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace mctrack;
using json = nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
  return io::read_file(std::string(MCTRACK_FIXTURES) + "/" + name);
}

json fixture_json() { return json::parse(fixture("one_frame.json")); }

template <class E>
void expect_error(const std::function<void(json&)>& corrupt) {
  json doc = fixture_json();
  corrupt(doc);
  CHECK_THROWS_AS(io::parse_scene_text(doc.dump()), E);
}

// Every numeric leaf, addressed as a JSON pointer.
void numeric_leaves(const json& j, const std::string& at, std::vector<std::string>& out) {
  if (j.is_number()) {
    out.push_back(at);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) numeric_leaves(v, at + "/" + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) numeric_leaves(j[i], at + "/" + std::to_string(i), out);
  }
}

}  // namespace

TEST_CASE("golden one-frame fixture parses to the expected record") {
  std::vector<std::string> warnings;
  const SceneRecord s = io::parse_scene_text(fixture("one_frame.json"), &warnings);
  CHECK(s.scene_id == "fixture-one");
  REQUIRE(s.frames.size() == 1);
  const FrameRecord& f = s.frames[0];
  CHECK(f.timestamp == 1.5);
  CHECK(f.token == "f0");
  REQUIRE(f.camera_calibrations.size() == 1);
  CHECK(f.camera_calibrations[0].fx() == 1000.0);
  CHECK(f.camera_calibrations[0].image_width == 1600);
  REQUIRE(f.detections.size() == 2);

  const DetectionBox& car = f.detections[0];
  CHECK(car.score == 0.92);
  CHECK(car.global_xyz == Vec3(12.5, -3.0, 0.8));
  CHECK(car.global_yaw == doctest::Approx(std::numbers::pi / 2));
  CHECK(car.global_velocity == Vec2(0.0, 5.0));
  CHECK(car.has_velocity);

  const DetectionBox& ped = f.detections[1];
  CHECK_FALSE(ped.has_velocity);
  CHECK_FALSE(ped.has_acceleration);
  CHECK(ped.global_velocity == Vec2::Zero());
  CHECK(warnings.size() == 2);
}

TEST_CASE("serialization is a fixed point after one round trip") {
  const SceneRecord a = io::parse_scene_text(fixture("three_frames.json"));
  const std::string text = io::serialize_scene(a);
  const SceneRecord b = io::parse_scene_text(text);
  CHECK(a == b);
  CHECK(io::serialize_scene(b) == text);
}

TEST_CASE("missing required fields are schema violations") {
  for (const char* key :
       {"detection_score", "category", "global_xyz", "lwh", "global_orientation", "global_yaw"}) {
    CAPTURE(key);
    expect_error<SchemaViolation>([&](json& d) { d["frames"][0]["detections"][0].erase(key); });
  }
  for (const char* key : {"frame_index", "timestamp", "token", "ego_to_global", "detections"}) {
    CAPTURE(key);
    expect_error<SchemaViolation>([&](json& d) { d["frames"][0].erase(key); });
  }
  expect_error<SchemaViolation>([](json& d) { d.erase("scene_id"); });
  expect_error<SchemaViolation>([](json& d) { d.erase("frames"); });
  expect_error<SchemaViolation>(
      [](json& d) { d["frames"][0]["camera_calibrations"][0].erase("intrinsics"); });
}

TEST_CASE("mistyped fields are schema violations") {
  expect_error<SchemaViolation>([](json& d) { d["frames"][0]["detections"][0]["detection_score"] = "high"; });
  expect_error<SchemaViolation>([](json& d) { d["frames"][0]["detections"][0]["global_xyz"] = {1.0, 2.0}; });
  expect_error<SchemaViolation>([](json& d) { d["frames"][0]["frame_index"] = 0.5; });
  expect_error<SchemaViolation>([](json& d) { d["frames"][0]["ego_to_global"][3] = {0.0, 0.0, 1.0}; });
  expect_error<SchemaViolation>([](json& d) { d["frames"] = json::object(); });
}

TEST_CASE("out-of-range values are invariant violations") {
  auto det = [](json& d) -> json& { return d["frames"][0]["detections"][0]; };
  expect_error<InvariantViolation>([&](json& d) { det(d)["detection_score"] = 1.5; });
  expect_error<InvariantViolation>([&](json& d) { det(d)["detection_score"] = -0.1; });
  expect_error<InvariantViolation>([&](json& d) { det(d)["lwh"][1] = 0.0; });
  expect_error<InvariantViolation>([&](json& d) { det(d)["global_orientation"] = {2.0, 0.0, 0.0, 0.0}; });
  expect_error<InvariantViolation>([&](json& d) { det(d)["global_yaw"] = 0.3; });
  expect_error<InvariantViolation>([&](json& d) { det(d)["category"] = "spaceship"; });
  expect_error<InvariantViolation>([](json& d) { d["frames"][0]["timestamp"] = -1.0; });
  expect_error<InvariantViolation>([](json& d) { d["frames"][0]["ego_to_global"][0][0] = 2.0; });
  expect_error<InvariantViolation>(
      [](json& d) { d["frames"][0]["camera_calibrations"][0]["intrinsics"][0][0] = 0.0; });
  expect_error<InvariantViolation>(
      [](json& d) { d["frames"][0]["camera_calibrations"][0]["image_size"][0] = 0; });
}

TEST_CASE("frames must be strictly ordered") {
  json doc = json::parse(fixture("three_frames.json"));
  std::swap(doc["frames"][0], doc["frames"][1]);
  CHECK_THROWS_AS(io::parse_scene_text(doc.dump()), SchemaViolation);

  json same = json::parse(fixture("three_frames.json"));
  same["frames"][1]["timestamp"] = same["frames"][0]["timestamp"];
  CHECK_THROWS_AS(io::parse_scene_text(same.dump()), SchemaViolation);
}

TEST_CASE("a declared vocabulary replaces the built-in one") {
  json doc = fixture_json();
  doc["categories"] = {"car"};
  CHECK_THROWS_AS(io::parse_scene_text(doc.dump()), InvariantViolation);
  doc["categories"] = {"car", "pedestrian"};
  CHECK_NOTHROW(io::parse_scene_text(doc.dump()));
}

TEST_CASE("fuzz: truncated documents are malformed") {
  const std::string text = fixture("one_frame.json");
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> cut(1, text.size() - 3);
  for (int i = 0; i < 200; ++i) {
    CHECK_THROWS_AS(io::parse_scene_text(text.substr(0, cut(rng))), MalformedDocument);
  }
}

TEST_CASE("fuzz: any numeric leaf replaced by a string is rejected as a schema violation") {
  const json base = fixture_json();
  std::vector<std::string> leaves;
  numeric_leaves(base, "", leaves);
  REQUIRE(leaves.size() > 40);
  for (const auto& ptr : leaves) {
    CAPTURE(ptr);
    json doc = base;
    doc[json::json_pointer(ptr)] = "x";
    CHECK_THROWS_AS(io::parse_scene_text(doc.dump()), SchemaViolation);
  }
}

TEST_CASE("fuzz: any non-finite numeric leaf is rejected") {
  const json base = fixture_json();
  std::vector<std::string> leaves;
  numeric_leaves(base, "", leaves);
  for (const auto& ptr : leaves) {
    CAPTURE(ptr);
    json doc = base;
    doc[json::json_pointer(ptr)] = 1e308;
    // Swapped for a literal that overflows to infinity.
    std::string s = doc.dump();
    const auto pos = s.find("1e+308");
    REQUIRE(pos != std::string::npos);
    s.replace(pos, 6, "1e+999");
    CHECK_THROWS_AS(io::parse_scene_text(s), Error);
  }
}

TEST_CASE("tracking output round-trips and rejects duplicate ids") {
  const SceneRecord scene = io::parse_scene_text(fixture("three_frames.json"));
  std::vector<std::vector<TrackedBox>> boxes(3);
  for (int k = 0; k < 3; ++k) {
    TrackedBox t;
    t.track_id = 5;
    t.box = scene.frames[static_cast<std::size_t>(k)].detections[0];
    t.estimated_velocity = Vec2(0.0, 5.0);
    t.state = LifecycleState::kConfirmed;
    boxes[static_cast<std::size_t>(k)].push_back(t);
  }
  const auto frames = io::make_tracking_frames(scene, boxes);
  const std::string text = io::serialize_tracking_output(frames);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  const auto back = io::parse_tracking_output_text(text);
  REQUIRE(back.size() == 3);
  CHECK(back[2].frame_index == 2);
  CHECK(back[2].boxes[0].track_id == 5);
  CHECK(back[2].boxes[0].estimated_velocity == Vec2(0.0, 5.0));
  CHECK(io::serialize_tracking_output(back) == text);

  auto dup = frames;
  dup[1].boxes.push_back(dup[1].boxes[0]);
  CHECK_THROWS_AS(io::serialize_tracking_output(dup), DuplicateTrackId);
}
