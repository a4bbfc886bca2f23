#include "mctrack/baseversion_io.hpp"

#include "mctrack/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace mctrack::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kRotationTol = 1e-6;
constexpr double kQuatNormTol = 1e-6;
constexpr double kYawTol = 1e-4;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaViolation(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(path + ": missing field '" + key + "'");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaViolation(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InvariantViolation(path + ": non-finite value");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaViolation(path + ": expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaViolation(path + ": expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaViolation(path + ": expected an array");
  return j;
}

template <int N>
Eigen::Matrix<double, N, 1> as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw SchemaViolation(path + ": expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    v(i) = as_number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

template <int N>
Eigen::Matrix<double, N, N> as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw SchemaViolation(path + ": expected a " + std::to_string(N) + "x" + std::to_string(N) +
                          " matrix");
  }
  Eigen::Matrix<double, N, N> m;
  for (int r = 0; r < N; ++r) {
    m.row(r) = as_vector<N>(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]")
                   .transpose();
  }
  return m;
}

template <class Derived>
ordered_json to_json_array(const Eigen::MatrixBase<Derived>& v) {
  ordered_json out = ordered_json::array();
  if (v.cols() == 1) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) out.push_back(v(i));
  } else {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < v.cols(); ++c) row.push_back(v(r, c));
      out.push_back(std::move(row));
    }
  }
  return out;
}

void check_rigid(const Mat4& t, const std::string& path) {
  const Mat3 r = t.topLeftCorner<3, 3>();
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTol || r.determinant() <= 0.0) {
    throw InvariantViolation(path + ": rotation block is not orthonormal");
  }
  const Eigen::RowVector4d last = t.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRotationTol) {
    throw InvariantViolation(path + ": last row must be [0, 0, 0, 1]");
  }
}

void validate_detection(const DetectionBox& d, const std::set<std::string>& vocab,
                        const std::string& path) {
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw InvariantViolation(path + ".detection_score: must lie in [0, 1]");
  }
  if (!vocab.contains(d.category)) {
    throw InvariantViolation(path + ".category: '" + d.category + "' is not in the vocabulary");
  }
  if (!(d.lwh.array() > 0.0).all()) {
    throw InvariantViolation(path + ".lwh: extents must be strictly positive");
  }
  if (std::abs(d.global_orientation.norm() - 1.0) > kQuatNormTol) {
    throw InvariantViolation(path + ".global_orientation: quaternion is not unit length");
  }
  if (!(d.global_yaw > -std::numbers::pi && d.global_yaw <= std::numbers::pi)) {
    throw InvariantViolation(path + ".global_yaw: must lie in (-pi, pi]");
  }
  const double quat_yaw = quaternion_to_yaw(d.global_orientation);
  if (std::abs(wrap_angle(quat_yaw - d.global_yaw)) > kYawTol) {
    throw InvariantViolation(path + ".global_orientation: disagrees with global_yaw");
  }
  if (!d.global_xyz.allFinite() || !d.global_velocity.allFinite() ||
      !d.global_acceleration.allFinite()) {
    throw InvariantViolation(path + ": non-finite kinematics");
  }
}

void validate_camera(const CameraCalib& c, const std::string& path) {
  if (!(c.fx() > 0.0) || !(c.fy() > 0.0)) {
    throw InvariantViolation(path + ".intrinsics: fx and fy must be positive");
  }
  if (c.image_width <= 0 || c.image_height <= 0) {
    throw InvariantViolation(path + ".image_size: must be positive");
  }
  check_rigid(c.global_to_camera, path + ".global_to_camera");
}

DetectionBox parse_detection(const json& j, const std::string& path,
                             std::vector<std::string>* warnings) {
  DetectionBox d;
  d.score = as_number(require(j, "detection_score", path), path + ".detection_score");
  d.category = as_string(require(j, "category", path), path + ".category");
  d.global_xyz = as_vector<3>(require(j, "global_xyz", path), path + ".global_xyz");
  d.lwh = as_vector<3>(require(j, "lwh", path), path + ".lwh");
  const auto q = as_vector<4>(require(j, "global_orientation", path), path + ".global_orientation");
  d.global_orientation = Eigen::Quaterniond(q(0), q(1), q(2), q(3));
  d.global_yaw = as_number(require(j, "global_yaw", path), path + ".global_yaw");

  if (const json* v = optional_field(j, "global_velocity")) {
    d.global_velocity = as_vector<2>(*v, path + ".global_velocity");
  } else {
    d.has_velocity = false;
    if (warnings) warnings->push_back(path + ": global_velocity missing, defaulted to zero");
  }
  if (const json* a = optional_field(j, "global_acceleration")) {
    d.global_acceleration = as_vector<2>(*a, path + ".global_acceleration");
  } else {
    d.has_acceleration = false;
    if (warnings) warnings->push_back(path + ": global_acceleration missing, defaulted to zero");
  }
  if (const json* id = optional_field(j, "instance_id")) {
    d.instance_id = as_int(*id, path + ".instance_id");
  }
  return d;
}

CameraCalib parse_camera(const json& j, const std::string& path) {
  CameraCalib c;
  c.camera_id = as_string(require(j, "camera_id", path), path + ".camera_id");
  c.intrinsics = as_matrix<3>(require(j, "intrinsics", path), path + ".intrinsics");
  c.global_to_camera =
      as_matrix<4>(require(j, "global_to_camera", path), path + ".global_to_camera");
  const json& size = require(j, "image_size", path);
  if (!size.is_array() || size.size() != 2) {
    throw SchemaViolation(path + ".image_size: expected [width, height]");
  }
  c.image_width = as_int(size[0], path + ".image_size[0]");
  c.image_height = as_int(size[1], path + ".image_size[1]");
  return c;
}

ordered_json detection_to_json(const DetectionBox& d) {
  ordered_json j;
  j["detection_score"] = d.score;
  j["category"] = d.category;
  j["global_xyz"] = to_json_array(d.global_xyz);
  j["lwh"] = to_json_array(d.lwh);
  const auto& q = d.global_orientation;
  j["global_orientation"] = {q.w(), q.x(), q.y(), q.z()};
  j["global_yaw"] = d.global_yaw;
  if (d.has_velocity) j["global_velocity"] = to_json_array(d.global_velocity);
  if (d.has_acceleration) j["global_acceleration"] = to_json_array(d.global_acceleration);
  if (d.instance_id) j["instance_id"] = *d.instance_id;
  return j;
}

ordered_json camera_to_json(const CameraCalib& c) {
  ordered_json j;
  j["camera_id"] = c.camera_id;
  j["intrinsics"] = to_json_array(c.intrinsics);
  j["global_to_camera"] = to_json_array(c.global_to_camera);
  j["image_size"] = {c.image_width, c.image_height};
  return j;
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw MalformedDocument(what + ": " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& builtin_categories() {
  static const std::vector<std::string> kCategories = {
      "car",        "truck",      "bus",      "trailer", "van",     "construction_vehicle",
      "pedestrian", "bicycle",    "motorcycle", "cyclist", "barrier", "traffic_cone",
      "vehicle",    "sign"};
  return kCategories;
}

void validate_scene(const SceneRecord& scene) {
  const auto& names = scene.categories.empty() ? builtin_categories() : scene.categories;
  const std::set<std::string> vocab(names.begin(), names.end());
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const FrameRecord& fr = scene.frames[f];
    const std::string path = "frames[" + std::to_string(f) + "]";
    if (!(fr.timestamp >= 0.0) || !std::isfinite(fr.timestamp)) {
      throw InvariantViolation(path + ".timestamp: must be non-negative");
    }
    if (f > 0) {
      const FrameRecord& prev = scene.frames[f - 1];
      if (fr.frame_index <= prev.frame_index) {
        throw SchemaViolation(path + ".frame_index: frames must be in strictly increasing order");
      }
      if (fr.timestamp <= prev.timestamp) {
        throw SchemaViolation(path + ".timestamp: timestamps must be strictly increasing");
      }
    }
    check_rigid(fr.ego_to_global, path + ".ego_to_global");
    for (std::size_t c = 0; c < fr.camera_calibrations.size(); ++c) {
      validate_camera(fr.camera_calibrations[c],
                      path + ".camera_calibrations[" + std::to_string(c) + "]");
    }
    for (std::size_t d = 0; d < fr.detections.size(); ++d) {
      validate_detection(fr.detections[d], vocab, path + ".detections[" + std::to_string(d) + "]");
    }
  }
}

SceneRecord parse_scene_text(std::string_view text, std::vector<std::string>* warnings) {
  const json doc = parse_json(text, "scene document");
  SceneRecord scene;
  scene.scene_id = as_string(require(doc, "scene_id", "$"), "$.scene_id");
  if (const json* cats = optional_field(doc, "categories")) {
    for (std::size_t i = 0; i < as_array(*cats, "$.categories").size(); ++i) {
      scene.categories.push_back(
          as_string((*cats)[i], "$.categories[" + std::to_string(i) + "]"));
    }
  }
  const json& frames = as_array(require(doc, "frames", "$"), "$.frames");
  scene.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const json& jf = frames[f];
    const std::string path = "frames[" + std::to_string(f) + "]";
    FrameRecord fr;
    fr.frame_index = as_int(require(jf, "frame_index", path), path + ".frame_index");
    fr.timestamp = as_number(require(jf, "timestamp", path), path + ".timestamp");
    fr.token = as_string(require(jf, "token", path), path + ".token");
    fr.ego_to_global = as_matrix<4>(require(jf, "ego_to_global", path), path + ".ego_to_global");
    if (const json* cams = optional_field(jf, "camera_calibrations")) {
      const std::string cpath = path + ".camera_calibrations";
      for (std::size_t c = 0; c < as_array(*cams, cpath).size(); ++c) {
        fr.camera_calibrations.push_back(
            parse_camera((*cams)[c], cpath + "[" + std::to_string(c) + "]"));
      }
    }
    const std::string dpath = path + ".detections";
    const json& dets = as_array(require(jf, "detections", path), dpath);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      fr.detections.push_back(parse_detection(dets[d], dpath + "[" + std::to_string(d) + "]",
                                              warnings));
    }
    scene.frames.push_back(std::move(fr));
  }
  validate_scene(scene);
  return scene;
}

SceneRecord parse_scene(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_scene_text(read_file(path), warnings);
}

std::string serialize_scene(const SceneRecord& scene) {
  ordered_json doc;
  doc["scene_id"] = scene.scene_id;
  if (!scene.categories.empty()) doc["categories"] = scene.categories;
  ordered_json frames = ordered_json::array();
  for (const auto& fr : scene.frames) {
    ordered_json jf;
    jf["frame_index"] = fr.frame_index;
    jf["timestamp"] = fr.timestamp;
    jf["token"] = fr.token;
    jf["ego_to_global"] = to_json_array(fr.ego_to_global);
    if (!fr.camera_calibrations.empty()) {
      ordered_json cams = ordered_json::array();
      for (const auto& c : fr.camera_calibrations) cams.push_back(camera_to_json(c));
      jf["camera_calibrations"] = std::move(cams);
    }
    ordered_json dets = ordered_json::array();
    for (const auto& d : fr.detections) dets.push_back(detection_to_json(d));
    jf["detections"] = std::move(dets);
    frames.push_back(std::move(jf));
  }
  doc["frames"] = std::move(frames);
  return doc.dump(2) + "\n";
}

void write_scene(const SceneRecord& scene, const std::filesystem::path& path) {
  write_file(path, serialize_scene(scene));
}

std::vector<TrackingFrame> make_tracking_frames(const SceneRecord& scene,
                                                std::span<const std::vector<TrackedBox>> boxes) {
  if (boxes.size() != scene.frames.size()) {
    throw std::invalid_argument("one box list per scene frame is required");
  }
  std::vector<TrackingFrame> out;
  out.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    out.push_back({scene.scene_id, scene.frames[i].frame_index, scene.frames[i].timestamp,
                   boxes[i]});
  }
  return out;
}

std::string serialize_tracking_output(std::span<const TrackingFrame> frames) {
  std::string out;
  for (const auto& f : frames) {
    std::set<int> seen;
    ordered_json jf;
    jf["scene_id"] = f.scene_id;
    jf["frame_index"] = f.frame_index;
    jf["timestamp"] = f.timestamp;
    ordered_json boxes = ordered_json::array();
    for (const auto& b : f.boxes) {
      if (!seen.insert(b.track_id).second) {
        throw DuplicateTrackId("frame " + std::to_string(f.frame_index) + ": track_id " +
                               std::to_string(b.track_id) + " appears twice");
      }
      ordered_json jb;
      jb["track_id"] = b.track_id;
      jb["category"] = b.box.category;
      jb["global_xyz"] = to_json_array(b.box.global_xyz);
      jb["lwh"] = to_json_array(b.box.lwh);
      jb["global_yaw"] = b.box.global_yaw;
      jb["score"] = b.box.score;
      jb["velocity"] = to_json_array(b.estimated_velocity);
      jb["acceleration"] = to_json_array(b.estimated_acceleration);
      jb["state"] = to_string(b.state);
      boxes.push_back(std::move(jb));
    }
    jf["boxes"] = std::move(boxes);
    out += jf.dump();
    out += '\n';
  }
  return out;
}

void write_tracking_output(std::span<const TrackingFrame> frames,
                           const std::filesystem::path& path) {
  write_file(path, serialize_tracking_output(frames));
}

std::vector<TrackingFrame> parse_tracking_output_text(std::string_view text) {
  std::vector<TrackingFrame> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = "line " + std::to_string(line_no);
    const json jf = parse_json(line, path);
    TrackingFrame f;
    f.scene_id = as_string(require(jf, "scene_id", path), path + ".scene_id");
    f.frame_index = as_int(require(jf, "frame_index", path), path + ".frame_index");
    f.timestamp = as_number(require(jf, "timestamp", path), path + ".timestamp");
    const json& boxes = as_array(require(jf, "boxes", path), path + ".boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const json& jb = boxes[i];
      const std::string bpath = path + ".boxes[" + std::to_string(i) + "]";
      TrackedBox b;
      b.track_id = as_int(require(jb, "track_id", bpath), bpath + ".track_id");
      b.box.category = as_string(require(jb, "category", bpath), bpath + ".category");
      b.box.global_xyz = as_vector<3>(require(jb, "global_xyz", bpath), bpath + ".global_xyz");
      b.box.lwh = as_vector<3>(require(jb, "lwh", bpath), bpath + ".lwh");
      b.box.global_yaw = as_number(require(jb, "global_yaw", bpath), bpath + ".global_yaw");
      b.box.global_orientation = yaw_to_quaternion(b.box.global_yaw);
      b.box.score = as_number(require(jb, "score", bpath), bpath + ".score");
      b.estimated_velocity = as_vector<2>(require(jb, "velocity", bpath), bpath + ".velocity");
      b.estimated_acceleration =
          as_vector<2>(require(jb, "acceleration", bpath), bpath + ".acceleration");
      b.box.global_velocity = b.estimated_velocity;
      b.box.global_acceleration = b.estimated_acceleration;
      b.state = lifecycle_from_string(as_string(require(jb, "state", bpath), bpath + ".state"));
      f.boxes.push_back(std::move(b));
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<TrackingFrame> read_tracking_output(const std::filesystem::path& path) {
  return parse_tracking_output_text(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace mctrack::io
