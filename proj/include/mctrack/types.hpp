#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <string>
#include <vector>

namespace mctrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// One perceived object in global coordinates.
///
/// `has_velocity` / `has_acceleration` record whether the source document
/// carried those fields. When absent they are zero-filled, and the position
/// filter drops the velocity observation rows for boxes without velocity.
struct DetectionBox {
  double score = 1.0;
  std::string category = "car";
  Vec3 global_xyz = Vec3::Zero();
  Vec3 lwh = Vec3::Ones();
  Eigen::Quaterniond global_orientation = Eigen::Quaterniond::Identity();
  double global_yaw = 0.0;
  Vec2 global_velocity = Vec2::Zero();
  Vec2 global_acceleration = Vec2::Zero();
  bool has_velocity = true;
  bool has_acceleration = true;
  // Ground-truth identity; only present in annotation scenes.
  std::optional<int> instance_id;

  friend bool operator==(const DetectionBox& a, const DetectionBox& b);
};

struct CameraCalib {
  std::string camera_id;
  Mat3 intrinsics = Mat3::Identity();
  Mat4 global_to_camera = Mat4::Identity();
  int image_width = 0;
  int image_height = 0;

  double fx() const { return intrinsics(0, 0); }
  double fy() const { return intrinsics(1, 1); }
  double cx() const { return intrinsics(0, 2); }
  double cy() const { return intrinsics(1, 2); }

  friend bool operator==(const CameraCalib& a, const CameraCalib& b);
};

struct FrameRecord {
  int frame_index = 0;
  double timestamp = 0.0;
  std::string token;
  std::vector<DetectionBox> detections;
  Mat4 ego_to_global = Mat4::Identity();
  std::vector<CameraCalib> camera_calibrations;

  friend bool operator==(const FrameRecord& a, const FrameRecord& b);
};

struct SceneRecord {
  std::string scene_id;
  // Optional explicit category vocabulary. Empty means the built-in one.
  std::vector<std::string> categories;
  std::vector<FrameRecord> frames;

  friend bool operator==(const SceneRecord& a, const SceneRecord& b);
};

enum class LifecycleState { kTentative, kConfirmed, kLost };

std::string to_string(LifecycleState s);
LifecycleState lifecycle_from_string(const std::string& s);

struct TrackedBox {
  int track_id = 0;
  DetectionBox box;
  Vec2 estimated_velocity = Vec2::Zero();
  Vec2 estimated_acceleration = Vec2::Zero();
  LifecycleState state = LifecycleState::kTentative;
};

/// Quaternion for a pure rotation about +z.
Eigen::Quaterniond yaw_to_quaternion(double yaw);
double quaternion_to_yaw(const Eigen::Quaterniond& q);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace mctrack
