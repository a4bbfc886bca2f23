#include <doctest.h>

#include "mctrack/ablation.hpp"
#include "mctrack/baseversion_io.hpp"
#include "mctrack/clear_metrics.hpp"
#include "mctrack/cli.hpp"
#include "mctrack/config.hpp"
#include "mctrack/errors.hpp"
#include "mctrack/geometry.hpp"
#include "mctrack/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace mctrack;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"mctrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mctrack_test_harness";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<io::TrackingFrame> as_tracking(const SceneRecord& gt,
                                           const std::function<int(int frame, int instance)>& id) {
  std::vector<io::TrackingFrame> out;
  for (const auto& f : gt.frames) {
    io::TrackingFrame t;
    t.frame_index = f.frame_index;
    t.timestamp = f.timestamp;
    for (const auto& d : f.detections) {
      TrackedBox b;
      b.box = d;
      b.track_id = id(f.frame_index, *d.instance_id);
      t.boxes.push_back(b);
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("shipped default config equals the built-in defaults") {
  const auto shipped =
      config::load_tracker_config(fs::path(MCTRACK_FIXTURES) / ".." / ".." / "config" /
                                  "default_config.json");
  CHECK(config::tracker_config_to_json(shipped) ==
        config::tracker_config_to_json(tracker::TrackerConfig{}));
}

TEST_CASE("config round-trips through its JSON form") {
  tracker::TrackerConfig cfg;
  cfg.association.cost_kind = association::CostKind::kDiou;
  cfg.association.threshold_bev.set("truck", -0.8);
  cfg.rv_enabled = false;
  const std::string text = config::tracker_config_to_json(cfg);
  CHECK(config::tracker_config_to_json(config::parse_tracker_config_text(text)) == text);
}

TEST_CASE("config overlays, comments and errors") {
  const auto cfg = config::parse_tracker_config_text(R"({
    "_comment": "ignored",
    "lifecycle": {"default": {"max_misses": 5},
                  "per_category": {"pedestrian": {"confirm_hits": 3}}},
    "association": {"cost_kind": "giou", "threshold_bev": {"default": -0.3}}
  })");
  CHECK(cfg.lifecycle.at("car").max_misses == 5);
  CHECK(cfg.lifecycle.at("pedestrian").max_misses == 5);
  CHECK(cfg.lifecycle.at("pedestrian").confirm_hits == 3);
  CHECK(cfg.association.cost_kind == association::CostKind::kGiou);
  CHECK(cfg.association.threshold_bev.at("car") == -0.3);

  CHECK_THROWS_AS(config::parse_tracker_config_text(R"({"lifecycle": {"default": {"max_mises": 1}}})"),
                  ConfigError);
  CHECK_THROWS_AS(config::parse_tracker_config_text(R"({"association": {"alpha": 2.0}})"), ConfigError);
  CHECK_THROWS_AS(config::parse_tracker_config_text(R"({"runtime": {"rv_enabled": 1}})"), ConfigError);
  CHECK_THROWS_AS(config::parse_tracker_config_text("{"), ConfigError);
}

TEST_CASE("zero noise: detections equal ground truth except scores") {
  scenario::ScenarioSpec spec;
  spec.motion_models = {scenario::MotionModel::kConstantVelocity, scenario::MotionModel::kConstantTurn,
                        scenario::MotionModel::kBrakeEvent};
  const auto s = scenario::generate_scenario(spec);
  REQUIRE(s.gt.frames.size() == s.detections.frames.size());
  for (std::size_t k = 0; k < s.gt.frames.size(); ++k) {
    auto det = s.detections.frames[k];
    for (auto& d : det.detections) d.score = 1.0;
    CHECK(det == s.gt.frames[k]);
  }
  CHECK_NOTHROW(io::validate_scene(s.gt));
  CHECK_NOTHROW(io::validate_scene(s.detections));
}

TEST_CASE("scenario generation is deterministic") {
  scenario::ScenarioSpec spec;
  spec.position_sigma = 0.3;
  spec.dropout_prob = 0.2;
  spec.fp_rate = 1.0;
  spec.seed = 42;
  const auto a = scenario::generate_scenario(spec);
  const auto b = scenario::generate_scenario(spec);
  CHECK(io::serialize_scene(a.detections) == io::serialize_scene(b.detections));
  spec.seed = 43;
  CHECK(io::serialize_scene(scenario::generate_scenario(spec).detections) !=
        io::serialize_scene(a.detections));
}

TEST_CASE("observed dropout concentrates around the configured rate") {
  scenario::ScenarioSpec spec;
  spec.n_objects = 10;
  spec.duration = 100;
  spec.dropout_prob = 0.2;
  spec.seed = 5;
  const auto s = scenario::generate_scenario(spec);
  std::size_t kept = 0;
  for (const auto& f : s.detections.frames) kept += f.detections.size();
  // 1000 Bernoulli draws: sd 0.0126, the bound is about 3 sd.
  CHECK(std::abs(1.0 - kept / 1000.0 - 0.2) <= 0.04);
}

TEST_CASE("brake event profile") {
  const double total = 10.0;
  CHECK(scenario::brake_event_speed(0.0, total) == doctest::Approx(80.0 / 3.6));
  CHECK(scenario::brake_event_speed(2.5, total) == doctest::Approx(100.0 / 3.6));
  CHECK(scenario::brake_event_speed(5.0, total) == doctest::Approx(60.0 / 3.6));
  CHECK(scenario::brake_event_speed(9.0, total) == doctest::Approx(60.0 / 3.6));

  scenario::ScenarioSpec spec;
  spec.n_objects = 1;
  spec.motion_models = {scenario::MotionModel::kBrakeEvent};
  const auto s = scenario::generate_scenario(spec);
  // Positions integrate the speed profile: mean of the sampled speeds times dt.
  const auto& f = s.gt.frames;
  for (std::size_t k = 1; k < f.size(); ++k) {
    const double dx = f[k].detections[0].global_xyz.x() - f[k - 1].detections[0].global_xyz.x();
    const double v0 = f[k - 1].detections[0].global_velocity.x();
    const double v1 = f[k].detections[0].global_velocity.x();
    CHECK(dx == doctest::Approx(0.5 * (v0 + v1) * 0.1).epsilon(1e-9));
  }
}

TEST_CASE("depth error moves a detection along the camera ray") {
  scenario::ScenarioSpec spec;
  spec.n_objects = 2;
  spec.depth_error_injections = {{10, 1, 8.0}};
  const auto s = scenario::generate_scenario(spec);
  const auto& truth = s.gt.frames[10].detections[1];
  const auto& shifted = s.detections.frames[10].detections[1];
  CHECK((shifted.global_xyz - truth.global_xyz).norm() == doctest::Approx(8.0));
  const CameraCalib cam = scenario::synthetic_front_camera();
  const auto project = [&](const Vec3& p) {
    const Eigen::Vector4d c = cam.global_to_camera * p.homogeneous();
    return Vec2(cam.fx() * c.x() / c.z() + cam.cx(), cam.fy() * c.y() / c.z() + cam.cy());
  };
  CHECK((project(shifted.global_xyz) - project(truth.global_xyz)).norm() < 1e-9);
}

TEST_CASE("scenario spec parsing") {
  const auto spec = scenario::parse_scenario_spec_text(R"({
    "n_objects": 3, "motion_model": ["brake_event", "constant_turn"], "duration": 50,
    "noise": {"position_sigma": 0.2}, "depth_error_injections": [{"frame": 3, "object": 2, "meters": 8}],
    "seed": 9
  })");
  CHECK(spec.n_objects == 3);
  CHECK(spec.motion_models.size() == 2);
  CHECK(spec.position_sigma == 0.2);
  CHECK(spec.depth_error_injections[0].meters == 8.0);
  CHECK(scenario::parse_scenario_spec_text(scenario::scenario_spec_to_json(spec)).seed == 9);
  CHECK_THROWS_AS(scenario::parse_scenario_spec_text(R"({"dropout_prob": 1.5})"), ConfigError);
  CHECK_THROWS_AS(scenario::parse_scenario_spec_text(R"({"motion_model": "teleport"})"), ConfigError);
  CHECK_THROWS_AS(scenario::parse_scenario_spec_text(R"({"noise": {"position_sigma": -1}})"), ConfigError);
}

TEST_CASE("CLEAR counts") {
  scenario::ScenarioSpec spec;
  spec.n_objects = 3;
  spec.duration = 20;
  const auto gt = scenario::generate_scenario(spec).gt;

  const auto perfect = clear::clear_counts(gt, as_tracking(gt, [](int, int i) { return i; }), 2.0);
  CHECK(perfect.tp == 60);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);
  CHECK(perfect.idsw == 0);
  CHECK(perfect.mota == 1.0);

  const auto split = clear::clear_counts(
      gt, as_tracking(gt, [](int f, int i) { return i == 1 && f >= 10 ? 99 : i; }), 2.0);
  CHECK(split.idsw == 1);

  std::vector<io::TrackingFrame> nothing;
  const auto empty = clear::clear_counts(gt, nothing, 2.0);
  CHECK(empty.fn == 60);
  CHECK(empty.mota <= 0.0);
}

TEST_CASE("CLI: track on a fixture succeeds and its output parses") {
  const fs::path out = scratch("three.ndjson");
  const auto r = run_cli({"track", "--input", std::string(MCTRACK_FIXTURES) + "/three_frames.json",
                          "--output", out.string()});
  CHECK(r.code == cli::kExitOk);
  const auto frames = io::read_tracking_output(out);
  CHECK(frames.size() == 3);
}

TEST_CASE("CLI: usage and validation exit codes") {
  auto r = run_cli({"track", "--input", "x.json"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("--output") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);

  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);

  const fs::path bad = scratch("bad.json");
  io::write_file(bad, "{\"scene_id\": 3}");
  r = run_cli({"track", "--input", bad.string(), "--output", scratch("bad.ndjson").string()});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("error:") != std::string::npos);

  r = run_cli({"track", "--input", scratch("missing.json").string(), "--output",
               scratch("m.ndjson").string()});
  CHECK(r.code == cli::kExitValidation);
}

TEST_CASE("CLI: generate, track, evaluate") {
  const fs::path spec = scratch("spec.json");
  io::write_file(spec, R"({"n_objects": 2, "duration": 40, "motion_model": "brake_event", "seed": 1})");
  const fs::path gt = scratch("gt.json"), det = scratch("det.json"), out = scratch("out.ndjson"),
                 rep = scratch("rep.json");
  CHECK(run_cli({"generate", "--spec", spec.string(), "--out-gt", gt.string(), "--out-det",
                 det.string()}).code == 0);
  CHECK(run_cli({"track", "--input", det.string(), "--output", out.string()}).code == 0);
  const auto clear_run = run_cli({"eval-clear", "--gt", gt.string(), "--pred", out.string()});
  CHECK(clear_run.code == 0);
  CHECK(nlohmann::json::parse(clear_run.out)["idsw"] == 0);
  for (const char* src : {"tracker", "differentiation", "curvefit"}) {
    CHECK(run_cli({"eval-motion", "--gt", gt.string(), "--pred", out.string(), "--report",
                   rep.string(), "--velocity-source", src}).code == 0);
    const auto report = nlohmann::json::parse(io::read_file(rep));
    CHECK(report["TP"].get<int>() > 0);
  }
}

TEST_CASE("CLI: ablate prints one row per cost kind") {
  const fs::path grid = scratch("grid.json"), rows = scratch("rows.json");
  io::write_file(grid, R"({
    "scenario": {"n_objects": 4, "duration": 40, "noise": {"position_sigma": 0.3},
                 "dropout_prob": 0.1, "seed": 0},
    "n_seeds": 2, "cost_kinds": ["ro_gdiou", "giou", "diou"], "rv_enabled": false
  })");
  const auto r = run_cli({"ablate", "--grid", grid.string(), "--output", rows.string()});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(io::read_file(rows));
  REQUIRE(j.size() == 3);
  CHECK(j[0]["cost_kind"] == "ro_gdiou");
  CHECK(j[2]["cost_kind"] == "diou");
  CHECK(j[1].contains("mean_mota"));
  CHECK(r.out.find("giou") != std::string::npos);
}
