#pragma once

#include "mctrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mctrack::scenario {

enum class MotionModel { kConstantVelocity, kConstantTurn, kBrakeEvent };

std::string to_string(MotionModel m);
MotionModel motion_model_from_string(const std::string& s);

struct DepthErrorInjection {
  int frame = 0;
  int object = 0;
  // Positive pushes the detection away from the camera.
  double meters = 0.0;
};

struct ScenarioSpec {
  std::string scene_id = "synthetic";
  int n_objects = 5;
  // Cycled over the objects when shorter than n_objects.
  std::vector<MotionModel> motion_models{MotionModel::kConstantVelocity};
  std::vector<std::string> categories{"car"};
  int duration = 100;  // frames
  double frame_rate = 10.0;
  double position_sigma = 0.0;
  double yaw_sigma = 0.0;
  double velocity_sigma = 0.0;
  double dropout_prob = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame
  std::vector<DepthErrorInjection> depth_error_injections;
  std::uint64_t seed = 0;
  bool camera = true;

  // Layout: object i drives along +x in lane y = (i - (n-1)/2) * lane_spacing.
  double lane_spacing = 4.0;
  double start_x_min = 10.0;
  double start_x_max = 40.0;
  double speed_min = 5.0;
  double speed_max = 15.0;
  double turn_rate_min = 0.02;  // rad/s, sign drawn at random
  double turn_rate_max = 0.08;

  void validate() const;
};

ScenarioSpec parse_scenario_spec_text(std::string_view text);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);
std::string scenario_spec_to_json(const ScenarioSpec& spec);

/// Speed (m/s) of the brake-event profile at time t of a scene lasting
/// `total` seconds: 80 -> 100 km/h over the first quarter, braking to 60 km/h
/// by the half, then constant.
double brake_event_speed(double t, double total);

/// Forward-facing pinhole 1.5 m above the ego origin (ego frame = global).
CameraCalib synthetic_front_camera();

struct GeneratedScenario {
  SceneRecord gt;
  SceneRecord detections;
};

/// Ground truth (score 1, instance ids, exact kinematics) and noisy
/// detections. All randomness comes from `spec.seed`.
GeneratedScenario generate_scenario(const ScenarioSpec& spec);

}  // namespace mctrack::scenario
