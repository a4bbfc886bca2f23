#include "mctrack/scenario.hpp"

#include "mctrack/baseversion_io.hpp"
#include "mctrack/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace mctrack::scenario {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kCameraHeight = 1.5;

Vec3 category_size(const std::string& c) {
  static const std::map<std::string, Vec3> sizes = {
      {"car", {4.5, 1.9, 1.6}},        {"truck", {8.0, 2.5, 3.0}},
      {"bus", {11.0, 2.9, 3.5}},       {"trailer", {10.0, 2.5, 3.5}},
      {"pedestrian", {0.8, 0.6, 1.75}}, {"bicycle", {1.8, 0.6, 1.3}},
      {"motorcycle", {2.1, 0.8, 1.4}}, {"cyclist", {1.8, 0.6, 1.7}},
  };
  const auto it = sizes.find(c);
  return it == sizes.end() ? Vec3(4.0, 2.0, 1.5) : it->second;
}

struct ObjectPlan {
  MotionModel model = MotionModel::kConstantVelocity;
  std::string category;
  Vec2 start = Vec2::Zero();
  double speed = 0.0;
  double turn_rate = 0.0;
};

struct Kinematics {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
  double yaw = 0.0;
};

// Distance covered by the brake-event profile after t seconds.
double brake_event_distance(double t, double total) {
  const double v0 = 80.0 / 3.6, vp = 100.0 / 3.6, vf = 60.0 / 3.6;
  const double t1 = 0.25 * total, t2 = 0.5 * total;
  const auto ramp = [](double from, double to, double span, double s) {
    return from * s + 0.5 * (to - from) / span * s * s;
  };
  if (t <= t1) return ramp(v0, vp, t1, t);
  const double d1 = ramp(v0, vp, t1, t1);
  if (t <= t2) return d1 + ramp(vp, vf, t2 - t1, t - t1);
  return d1 + ramp(vp, vf, t2 - t1, t2 - t1) + vf * (t - t2);
}

Kinematics kinematics(const ObjectPlan& o, double t, double total) {
  Kinematics k;
  switch (o.model) {
    case MotionModel::kConstantVelocity:
      k.position = o.start + Vec2(o.speed * t, 0.0);
      k.velocity = Vec2(o.speed, 0.0);
      k.acceleration = Vec2::Zero();
      k.yaw = 0.0;
      break;
    case MotionModel::kConstantTurn: {
      const double w = o.turn_rate;
      k.yaw = wrap_angle(w * t);
      k.position = o.start + o.speed / w * Vec2(std::sin(w * t), 1.0 - std::cos(w * t));
      k.velocity = o.speed * Vec2(std::cos(w * t), std::sin(w * t));
      k.acceleration = o.speed * w * Vec2(-std::sin(w * t), std::cos(w * t));
      break;
    }
    case MotionModel::kBrakeEvent: {
      const double t1 = 0.25 * total, t2 = 0.5 * total;
      k.position = o.start + Vec2(brake_event_distance(t, total), 0.0);
      k.velocity = Vec2(brake_event_speed(t, total), 0.0);
      double a = 0.0;
      if (t < t1) {
        a = (100.0 - 80.0) / 3.6 / t1;
      } else if (t < t2) {
        a = (60.0 - 100.0) / 3.6 / (t2 - t1);
      }
      k.acceleration = Vec2(a, 0.0);
      k.yaw = 0.0;
      break;
    }
  }
  return k;
}

DetectionBox make_box(const std::string& category, const Vec2& xy, double yaw, const Vec2& v,
                      const Vec2& a) {
  DetectionBox b;
  b.category = category;
  b.lwh = category_size(category);
  b.global_xyz = Vec3(xy.x(), xy.y(), 0.5 * b.lwh.z());
  b.global_yaw = wrap_angle(yaw);
  b.global_orientation = yaw_to_quaternion(b.global_yaw);
  b.global_velocity = v;
  b.global_acceleration = a;
  return b;
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("scenario." + key + ": expected a number");
  return j.get<double>();
}

}  // namespace

std::string to_string(MotionModel m) {
  switch (m) {
    case MotionModel::kConstantVelocity:
      return "constant_velocity";
    case MotionModel::kConstantTurn:
      return "constant_turn";
    case MotionModel::kBrakeEvent:
      return "brake_event";
  }
  return "constant_velocity";
}

MotionModel motion_model_from_string(const std::string& s) {
  if (s == "constant_velocity") return MotionModel::kConstantVelocity;
  if (s == "constant_turn") return MotionModel::kConstantTurn;
  if (s == "brake_event") return MotionModel::kBrakeEvent;
  throw ConfigError("unknown motion model '" + s + "'");
}

void ScenarioSpec::validate() const {
  if (n_objects < 0) throw ConfigError("n_objects must be >= 0");
  if (duration < 1) throw ConfigError("duration must be >= 1 frame");
  if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be > 0");
  if (motion_models.empty()) throw ConfigError("motion_model list is empty");
  if (categories.empty()) throw ConfigError("category list is empty");
  if (!(position_sigma >= 0.0 && yaw_sigma >= 0.0 && velocity_sigma >= 0.0)) {
    throw ConfigError("noise sigmas must be >= 0");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) throw ConfigError("dropout_prob must be in [0, 1]");
  if (!(fp_rate >= 0.0)) throw ConfigError("fp_rate must be >= 0");
  if (!(start_x_max >= start_x_min && speed_max >= speed_min && turn_rate_max >= turn_rate_min)) {
    throw ConfigError("layout ranges must have max >= min");
  }
  if (!(turn_rate_min > 0.0)) throw ConfigError("turn_rate_min must be > 0");
  for (const auto& inj : depth_error_injections) {
    if (inj.frame < 0 || inj.frame >= duration || inj.object < 0 || inj.object >= n_objects) {
      throw ConfigError("depth error injection outside the scenario");
    }
  }
}

ScenarioSpec parse_scenario_spec_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario spec must be an object");
  ScenarioSpec s;
  for (const auto& [key, v] : j.items()) {
    if (!key.empty() && key.front() == '_') continue;
    if (key == "scene_id") {
      if (!v.is_string()) throw ConfigError("scenario.scene_id: expected a string");
      s.scene_id = v.get<std::string>();
    } else if (key == "n_objects") {
      if (!v.is_number_integer()) throw ConfigError("scenario.n_objects: expected an integer");
      s.n_objects = v.get<int>();
    } else if (key == "duration") {
      if (!v.is_number_integer()) throw ConfigError("scenario.duration: expected an integer");
      s.duration = v.get<int>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("scenario.seed: expected a non-negative integer");
      s.seed = v.get<std::uint64_t>();
    } else if (key == "motion_model" || key == "category") {
      std::vector<std::string> names;
      if (v.is_string()) {
        names.push_back(v.get<std::string>());
      } else if (v.is_array()) {
        for (const auto& e : v) {
          if (!e.is_string()) throw ConfigError("scenario." + key + ": expected strings");
          names.push_back(e.get<std::string>());
        }
      } else {
        throw ConfigError("scenario." + key + ": expected a string or a list of strings");
      }
      if (key == "category") {
        s.categories = names;
      } else {
        s.motion_models.clear();
        for (const auto& n : names) s.motion_models.push_back(motion_model_from_string(n));
      }
    } else if (key == "noise") {
      if (!v.is_object()) throw ConfigError("scenario.noise: expected an object");
      for (const auto& [nk, nv] : v.items()) {
        if (!nk.empty() && nk.front() == '_') continue;
        if (nk == "position_sigma") {
          s.position_sigma = get_number(nv, "noise.position_sigma");
        } else if (nk == "yaw_sigma") {
          s.yaw_sigma = get_number(nv, "noise.yaw_sigma");
        } else if (nk == "velocity_sigma") {
          s.velocity_sigma = get_number(nv, "noise.velocity_sigma");
        } else {
          throw ConfigError("scenario.noise: unknown key '" + nk + "'");
        }
      }
    } else if (key == "camera") {
      if (!v.is_boolean()) throw ConfigError("scenario.camera: expected true or false");
      s.camera = v.get<bool>();
    } else if (key == "depth_error_injections") {
      if (!v.is_array()) throw ConfigError("scenario.depth_error_injections: expected a list");
      for (const auto& e : v) {
        if (!e.is_object() || !e.contains("frame") || !e.contains("object") ||
            !e.contains("meters") || !e["frame"].is_number_integer() ||
            !e["object"].is_number_integer()) {
          throw ConfigError(
              "scenario.depth_error_injections: entries need integer frame, object and a "
              "number meters");
        }
        s.depth_error_injections.push_back(
            {e["frame"].get<int>(), e["object"].get<int>(), get_number(e["meters"], "meters")});
      }
    } else {
      static const std::map<std::string, double ScenarioSpec::*> numbers = {
          {"frame_rate", &ScenarioSpec::frame_rate},
          {"dropout_prob", &ScenarioSpec::dropout_prob},
          {"fp_rate", &ScenarioSpec::fp_rate},
          {"lane_spacing", &ScenarioSpec::lane_spacing},
          {"start_x_min", &ScenarioSpec::start_x_min},
          {"start_x_max", &ScenarioSpec::start_x_max},
          {"speed_min", &ScenarioSpec::speed_min},
          {"speed_max", &ScenarioSpec::speed_max},
          {"turn_rate_min", &ScenarioSpec::turn_rate_min},
          {"turn_rate_max", &ScenarioSpec::turn_rate_max},
      };
      const auto it = numbers.find(key);
      if (it == numbers.end()) throw ConfigError("scenario: unknown key '" + key + "'");
      s.*(it->second) = get_number(v, key);
    }
  }
  s.validate();
  return s;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  return parse_scenario_spec_text(io::read_file(path));
}

std::string scenario_spec_to_json(const ScenarioSpec& s) {
  ordered_json j;
  j["scene_id"] = s.scene_id;
  j["n_objects"] = s.n_objects;
  ordered_json models = ordered_json::array();
  for (auto m : s.motion_models) models.push_back(to_string(m));
  j["motion_model"] = models;
  j["category"] = s.categories;
  j["duration"] = s.duration;
  j["frame_rate"] = s.frame_rate;
  j["noise"] = {{"position_sigma", s.position_sigma},
                {"yaw_sigma", s.yaw_sigma},
                {"velocity_sigma", s.velocity_sigma}};
  j["dropout_prob"] = s.dropout_prob;
  j["fp_rate"] = s.fp_rate;
  ordered_json inj = ordered_json::array();
  for (const auto& e : s.depth_error_injections) {
    inj.push_back({{"frame", e.frame}, {"object", e.object}, {"meters", e.meters}});
  }
  j["depth_error_injections"] = inj;
  j["seed"] = s.seed;
  j["camera"] = s.camera;
  j["lane_spacing"] = s.lane_spacing;
  j["start_x_min"] = s.start_x_min;
  j["start_x_max"] = s.start_x_max;
  j["speed_min"] = s.speed_min;
  j["speed_max"] = s.speed_max;
  j["turn_rate_min"] = s.turn_rate_min;
  j["turn_rate_max"] = s.turn_rate_max;
  return j.dump(2) + "\n";
}

double brake_event_speed(double t, double total) {
  const double v0 = 80.0 / 3.6, vp = 100.0 / 3.6, vf = 60.0 / 3.6;
  const double t1 = 0.25 * total, t2 = 0.5 * total;
  if (t <= t1) return v0 + (vp - v0) * t / t1;
  if (t <= t2) return vp + (vf - vp) * (t - t1) / (t2 - t1);
  return vf;
}

CameraCalib synthetic_front_camera() {
  CameraCalib c;
  c.camera_id = "CAM_FRONT";
  c.intrinsics << 1000.0, 0.0, 800.0, 0.0, 1000.0, 450.0, 0.0, 0.0, 1.0;
  c.image_width = 1600;
  c.image_height = 900;
  Mat3 r;
  r << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  c.global_to_camera.setIdentity();
  c.global_to_camera.topLeftCorner<3, 3>() = r;
  c.global_to_camera.topRightCorner<3, 1>() = -r * Vec3(0.0, 0.0, kCameraHeight);
  return c;
}

GeneratedScenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double dt = 1.0 / spec.frame_rate;
  const double total = spec.duration * dt;

  std::vector<ObjectPlan> plans(static_cast<std::size_t>(spec.n_objects));
  for (int i = 0; i < spec.n_objects; ++i) {
    auto& p = plans[static_cast<std::size_t>(i)];
    p.model = spec.motion_models[static_cast<std::size_t>(i) % spec.motion_models.size()];
    p.category = spec.categories[static_cast<std::size_t>(i) % spec.categories.size()];
    const double lane = (i - 0.5 * (spec.n_objects - 1)) * spec.lane_spacing;
    p.start = Vec2(uniform(spec.start_x_min, spec.start_x_max), lane);
    p.speed = uniform(spec.speed_min, spec.speed_max);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    p.turn_rate = sign * uniform(spec.turn_rate_min, spec.turn_rate_max);
  }

  std::map<std::pair<int, int>, double> injections;
  for (const auto& e : spec.depth_error_injections) injections[{e.frame, e.object}] += e.meters;

  const CameraCalib camera = synthetic_front_camera();
  const Vec3 camera_center(0.0, 0.0, kCameraHeight);
  const double half_width = 0.5 * std::max(1, spec.n_objects) * spec.lane_spacing;
  const double x_far = spec.start_x_max + spec.speed_max * total;

  GeneratedScenario out;
  out.gt.scene_id = spec.scene_id;
  out.detections.scene_id = spec.scene_id;
  for (int k = 0; k < spec.duration; ++k) {
    FrameRecord gt_frame;
    gt_frame.frame_index = k;
    gt_frame.timestamp = k * dt;
    gt_frame.token = spec.scene_id + "-" + std::to_string(k);
    if (spec.camera) gt_frame.camera_calibrations.push_back(camera);
    FrameRecord det_frame = gt_frame;

    for (int i = 0; i < spec.n_objects; ++i) {
      const auto& plan = plans[static_cast<std::size_t>(i)];
      const Kinematics kin = kinematics(plan, gt_frame.timestamp, total);
      DetectionBox gt_box = make_box(plan.category, kin.position, kin.yaw, kin.velocity,
                                     kin.acceleration);
      gt_box.instance_id = i;
      gt_frame.detections.push_back(gt_box);

      // Draw every variate even for dropped boxes so the stream stays aligned.
      const double drop = unit(rng);
      const Vec2 pos_noise(gauss(rng), gauss(rng));
      const double yaw_noise = gauss(rng);
      const Vec2 vel_noise(gauss(rng), gauss(rng));
      const double score = uniform(0.7, 1.0);

      const auto inj = injections.find({k, i});
      if (drop < spec.dropout_prob && inj == injections.end()) continue;
      DetectionBox det = make_box(plan.category, kin.position + spec.position_sigma * pos_noise,
                                  kin.yaw + spec.yaw_sigma * yaw_noise,
                                  kin.velocity + spec.velocity_sigma * vel_noise, kin.acceleration);
      det.score = score;
      det.instance_id = i;
      if (inj != injections.end()) {
        const Vec3 ray = (det.global_xyz - camera_center).normalized();
        det.global_xyz += inj->second * ray;
      }
      det_frame.detections.push_back(det);
    }

    std::poisson_distribution<int> fp_count(spec.fp_rate);
    const int n_fp = spec.fp_rate > 0.0 ? fp_count(rng) : 0;
    for (int f = 0; f < n_fp; ++f) {
      const Vec2 xy(uniform(spec.start_x_min, x_far), uniform(-half_width, half_width));
      const double yaw = uniform(-std::numbers::pi, std::numbers::pi);
      const std::string& category = spec.categories[static_cast<std::size_t>(f) % spec.categories.size()];
      DetectionBox fp = make_box(category, xy, yaw, Vec2::Zero(), Vec2::Zero());
      fp.score = uniform(0.1, 0.5);
      det_frame.detections.push_back(fp);
    }

    out.gt.frames.push_back(std::move(gt_frame));
    out.detections.frames.push_back(std::move(det_frame));
  }
  return out;
}

}  // namespace mctrack::scenario
