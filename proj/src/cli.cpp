#include "mctrack/cli.hpp"

#include "mctrack/ablation.hpp"
#include "mctrack/baseversion_io.hpp"
#include "mctrack/clear_metrics.hpp"
#include "mctrack/config.hpp"
#include "mctrack/errors.hpp"
#include "mctrack/motion_metrics.hpp"
#include "mctrack/scenario.hpp"
#include "mctrack/tracker.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace mctrack::cli {

namespace {

struct Options {
  std::string input, config, output;
  std::string gt, pred, report;
  std::string velocity_source = "tracker";
  bool per_trajectory = false;
  metrics::MotionEvalConfig motion;
  double distance = 2.0;
  int trim = 0;
  std::string spec, out_gt, out_det;
  std::string grid;
};

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  // One summary line per distinct message keeps large scenes readable.
  std::map<std::string, int> counts;
  for (const auto& w : warnings) ++counts[w];
  for (const auto& [w, n] : counts) {
    err << "warning: " << w;
    if (n > 1) err << " (" << n << " times)";
    err << "\n";
  }
}

int run_track(const Options& o, std::ostream& err) {
  std::vector<std::string> warnings;
  const SceneRecord scene = io::parse_scene(o.input, &warnings);
  print_warnings(warnings, err);
  const tracker::TrackerConfig cfg =
      o.config.empty() ? tracker::TrackerConfig{} : config::load_tracker_config(o.config);
  const auto boxes = tracker::run_scene(scene, cfg);
  io::write_tracking_output(io::make_tracking_frames(scene, boxes), o.output);
  return kExitOk;
}

int run_eval_motion(const Options& o) {
  const SceneRecord gt = io::parse_scene(o.gt);
  std::vector<io::TrackingFrame> pred = io::read_tracking_output(o.pred);
  if (o.velocity_source != "tracker") {
    double spf = 0.0;
    if (gt.frames.size() >= 2) {
      spf = (gt.frames.back().timestamp - gt.frames.front().timestamp) /
            (gt.frames.back().frame_index - gt.frames.front().frame_index);
    }
    if (!(spf > 0.0)) throw InvariantViolation("cannot derive the frame period from the gt scene");
    const auto method = o.velocity_source == "differentiation"
                            ? metrics::VelocityEstimator::kDifferentiation
                            : metrics::VelocityEstimator::kCurveFit;
    pred = metrics::reestimate_velocities(pred, method, spf);
  }
  metrics::MotionEvalConfig cfg = o.motion;
  cfg.sample_weighted = !o.per_trajectory;
  cfg.sg.validate();
  const metrics::MotionReport r = metrics::evaluate_motion(gt, pred, cfg);
  io::write_file(o.report, metrics::motion_report_json(r));
  return kExitOk;
}

int run_eval_clear(const Options& o, std::ostream& out) {
  const SceneRecord gt = io::parse_scene(o.gt);
  std::vector<io::TrackingFrame> pred = io::read_tracking_output(o.pred);
  SceneRecord trimmed = gt;
  if (o.trim > 0) {
    std::erase_if(trimmed.frames,
                  [&](const FrameRecord& f) { return f.frame_index < gt.frames.front().frame_index + o.trim; });
    std::erase_if(pred, [&](const io::TrackingFrame& f) {
      return f.frame_index < gt.frames.front().frame_index + o.trim;
    });
  }
  const std::string report = clear::clear_counts_json(clear::clear_counts(trimmed, pred, o.distance));
  out << report;
  if (!o.report.empty()) io::write_file(o.report, report);
  return kExitOk;
}

int run_generate(const Options& o) {
  const scenario::ScenarioSpec spec = scenario::load_scenario_spec(o.spec);
  const scenario::GeneratedScenario s = scenario::generate_scenario(spec);
  io::write_scene(s.gt, o.out_gt);
  io::write_scene(s.detections, o.out_det);
  return kExitOk;
}

int run_ablate(const Options& o, std::ostream& out) {
  const auto rows = ablation::run_ablation(ablation::load_ablation_grid(o.grid));
  out << ablation::ablation_table(rows);
  if (!o.output.empty()) io::write_file(o.output, ablation::ablation_json(rows));
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"3D multi-object tracking, motion metrics and synthetic scenarios", "mctrack"};
  app.require_subcommand(1);
  Options o;

  auto* track = app.add_subcommand("track", "Track one BaseVersion scene");
  track->add_option("--input", o.input, "BaseVersion scene JSON")->required();
  track->add_option("--config", o.config, "Tracker config JSON (defaults when omitted)");
  track->add_option("--output", o.output, "Tracking output NDJSON")->required();

  auto* motion = app.add_subcommand("eval-motion", "Velocity metrics against annotated boxes");
  motion->add_option("--gt", o.gt, "Annotated BaseVersion scene")->required();
  motion->add_option("--pred", o.pred, "Tracking output NDJSON")->required();
  motion->add_option("--report", o.report, "Report JSON path")->required();
  motion->add_option("--velocity-source", o.velocity_source,
                     "tracker, differentiation or curvefit")
      ->check(CLI::IsMember({"tracker", "differentiation", "curvefit"}));
  motion->add_flag("--per-trajectory", o.per_trajectory,
                   "Average over trajectories instead of samples");
  motion->add_option("--sg-window", o.motion.sg.window, "Savitzky-Golay window");
  motion->add_option("--sg-order", o.motion.sg.order, "Savitzky-Golay order");
  motion->add_option("--vde-window", o.motion.vde_window, "VDE window (frames)");
  motion->add_option("--vde-max-shift", o.motion.vde_max_shift, "VDE maximum shift (frames)");
  motion->add_option("--min-gt-speed", o.motion.min_gt_speed,
                     "gt speed below which angle metrics skip a sample");

  auto* clear_cmd = app.add_subcommand("eval-clear", "Simplified CLEAR counts (MOTA, IDSW)");
  clear_cmd->add_option("--gt", o.gt, "Annotated BaseVersion scene")->required();
  clear_cmd->add_option("--pred", o.pred, "Tracking output NDJSON")->required();
  clear_cmd->add_option("--distance", o.distance, "Match distance in meters")
      ->check(CLI::PositiveNumber);
  clear_cmd->add_option("--skip-frames", o.trim, "Ignore this many leading frames")
      ->check(CLI::NonNegativeNumber);
  clear_cmd->add_option("--report", o.report, "Also write the counts to this path");

  auto* gen = app.add_subcommand("generate", "Synthesize a gt scene and its detections");
  gen->add_option("--spec", o.spec, "Scenario spec JSON")->required();
  gen->add_option("--out-gt", o.out_gt, "Ground-truth scene path")->required();
  gen->add_option("--out-det", o.out_det, "Detection scene path")->required();

  auto* ablate = app.add_subcommand("ablate", "Sweep cost kind x RV stage on synthetic scenes");
  ablate->add_option("--grid", o.grid, "Ablation grid JSON")->required();
  ablate->add_option("--output", o.output, "Also write the rows as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (track->parsed()) return run_track(o, err);
    if (motion->parsed()) return run_eval_motion(o);
    if (clear_cmd->parsed()) return run_eval_clear(o, out);
    if (gen->parsed()) return run_generate(o);
    if (ablate->parsed()) return run_ablate(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace mctrack::cli
