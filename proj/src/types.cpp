#include "mctrack/types.hpp"

#include "mctrack/category_table.hpp"
#include "mctrack/errors.hpp"

#include <cmath>
#include <numbers>

namespace mctrack {

bool operator==(const DetectionBox& a, const DetectionBox& b) {
  return a.score == b.score && a.category == b.category && a.global_xyz == b.global_xyz &&
         a.lwh == b.lwh && a.global_orientation.coeffs() == b.global_orientation.coeffs() &&
         a.global_yaw == b.global_yaw && a.global_velocity == b.global_velocity &&
         a.global_acceleration == b.global_acceleration && a.has_velocity == b.has_velocity &&
         a.has_acceleration == b.has_acceleration && a.instance_id == b.instance_id;
}

bool operator==(const CameraCalib& a, const CameraCalib& b) {
  return a.camera_id == b.camera_id && a.intrinsics == b.intrinsics &&
         a.global_to_camera == b.global_to_camera && a.image_width == b.image_width &&
         a.image_height == b.image_height;
}

bool operator==(const FrameRecord& a, const FrameRecord& b) {
  return a.frame_index == b.frame_index && a.timestamp == b.timestamp && a.token == b.token &&
         a.detections == b.detections && a.ego_to_global == b.ego_to_global &&
         a.camera_calibrations == b.camera_calibrations;
}

bool operator==(const SceneRecord& a, const SceneRecord& b) {
  return a.scene_id == b.scene_id && a.categories == b.categories && a.frames == b.frames;
}

std::string to_string(LifecycleState s) {
  switch (s) {
    case LifecycleState::kTentative:
      return "tentative";
    case LifecycleState::kConfirmed:
      return "confirmed";
    case LifecycleState::kLost:
      return "lost";
  }
  return "tentative";
}

LifecycleState lifecycle_from_string(const std::string& s) {
  if (s == "tentative") return LifecycleState::kTentative;
  if (s == "confirmed") return LifecycleState::kConfirmed;
  if (s == "lost") return LifecycleState::kLost;
  throw SchemaViolation("unknown lifecycle state '" + s + "'");
}

Eigen::Quaterniond yaw_to_quaternion(double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

double quaternion_to_yaw(const Eigen::Quaterniond& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                    1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

bool is_vehicle_category(const std::string& c) {
  return c == "car" || c == "truck" || c == "bus" || c == "trailer" || c == "van" ||
         c == "construction_vehicle" || c == "vehicle";
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  r -= std::numbers::pi;
  // fmod maps +pi to -pi; the convention here is (-pi, pi].
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

}  // namespace mctrack
