#include "mctrack/ablation.hpp"
#include "mctrack/association.hpp"
#include "mctrack/baseversion_io.hpp"
#include "mctrack/clear_metrics.hpp"
#include "mctrack/cli.hpp"
#include "mctrack/config.hpp"
#include "mctrack/errors.hpp"
#include "mctrack/geometry.hpp"
#include "mctrack/motion_metrics.hpp"
#include "mctrack/scenario.hpp"
#include "mctrack/tracker.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mctrack;

namespace {

association::CostMatrix to_cost(const Eigen::MatrixXd& values) {
  association::CostMatrix c;
  c.values = values;
  for (Eigen::Index r = 0; r < values.rows(); ++r) c.row_ids.push_back(static_cast<int>(r));
  for (Eigen::Index k = 0; k < values.cols(); ++k) c.col_ids.push_back(static_cast<int>(k));
  return c;
}

py::dict match_dict(const association::MatchSet& m) {
  py::dict d;
  d["pairs"] = m.pairs;
  d["unmatched_rows"] = m.unmatched_detections;
  d["unmatched_cols"] = m.unmatched_tracks;
  return d;
}

std::vector<io::TrackingFrame> track_scene(const SceneRecord& scene, const std::string& config_json) {
  const tracker::TrackerConfig cfg = config_json.empty()
                                         ? tracker::TrackerConfig{}
                                         : config::parse_tracker_config_text(config_json);
  return io::make_tracking_frames(scene, tracker::run_scene(scene, cfg));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "3D multi-object tracking core";

  py::register_exception<Error>(m, "MctrackError", PyExc_ValueError);

  py::class_<geometry::Box7>(m, "Box7")
      .def(py::init([](double x, double y, double z, double l, double w, double h, double theta) {
             return geometry::Box7{x, y, z, l, w, h, theta};
           }),
           py::arg("x"), py::arg("y"), py::arg("z"), py::arg("l"), py::arg("w"), py::arg("h"),
           py::arg("theta"))
      .def_readwrite("x", &geometry::Box7::x)
      .def_readwrite("y", &geometry::Box7::y)
      .def_readwrite("z", &geometry::Box7::z)
      .def_readwrite("l", &geometry::Box7::l)
      .def_readwrite("w", &geometry::Box7::w)
      .def_readwrite("h", &geometry::Box7::h)
      .def_readwrite("theta", &geometry::Box7::theta)
      .def("__repr__", [](const geometry::Box7& b) {
        std::ostringstream s;
        s << "Box7(x=" << b.x << ", y=" << b.y << ", z=" << b.z << ", l=" << b.l << ", w=" << b.w
          << ", h=" << b.h << ", theta=" << b.theta << ")";
        return s.str();
      });

  m.def("corners_3d", &geometry::corners_3d, py::arg("box"));
  m.def(
      "bev_overlap_area",
      [](const geometry::Box7& a, const geometry::Box7& b) {
        return geometry::convex_overlap_area(geometry::bev_polygon(a), geometry::bev_polygon(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("ro_iou", &geometry::ro_iou, py::arg("a"), py::arg("b"));
  m.def(
      "ro_gdiou",
      [](const geometry::Box7& a, const geometry::Box7& b, double omega1, double omega2) {
        return geometry::ro_gdiou(a, b, {omega1, omega2});
      },
      py::arg("a"), py::arg("b"), py::arg("omega1") = 1.0, py::arg("omega2") = 1.0);
  m.def("giou_bev", &geometry::giou_bev, py::arg("a"), py::arg("b"));
  m.def("diou_bev", &geometry::diou_bev, py::arg("a"), py::arg("b"));
  m.def(
      "sdiou_rv",
      [](std::array<double, 4> a, std::array<double, 4> b) {
        return geometry::sdiou_rv({a[0], a[1], a[2], a[3]}, {b[0], b[1], b[2], b[3]});
      },
      py::arg("a"), py::arg("b"), "Rectangles as (x_min, y_min, x_max, y_max).");

  m.def(
      "hungarian",
      [](const Eigen::MatrixXd& cost, double threshold) {
        return match_dict(association::hungarian(to_cost(cost), threshold));
      },
      py::arg("cost"), py::arg("threshold") = association::kForbiddenCost / 2);
  m.def(
      "greedy",
      [](const Eigen::MatrixXd& cost, double threshold) {
        return match_dict(association::greedy(to_cost(cost), threshold));
      },
      py::arg("cost"), py::arg("threshold") = association::kForbiddenCost / 2);

  m.def(
      "parse_scene",
      [](const std::string& text) { return io::serialize_scene(io::parse_scene_text(text)); },
      py::arg("text"), "Validates a BaseVersion document and returns its canonical form.");
  m.def(
      "track",
      [](const std::string& scene_text, const std::string& config_text) {
        const SceneRecord scene = io::parse_scene_text(scene_text);
        return io::serialize_tracking_output(track_scene(scene, config_text));
      },
      py::arg("scene"), py::arg("config") = "",
      "Tracks a BaseVersion document; returns NDJSON tracking output.");
  m.def(
      "default_config", [] { return config::tracker_config_to_json(tracker::TrackerConfig{}); });

  m.def(
      "generate_scenario",
      [](const std::string& spec_text) {
        const auto s = scenario::generate_scenario(scenario::parse_scenario_spec_text(spec_text));
        return py::make_tuple(io::serialize_scene(s.gt), io::serialize_scene(s.detections));
      },
      py::arg("spec"), "Returns (gt, detections) BaseVersion documents.");

  m.def(
      "clear_counts",
      [](const std::string& gt_text, const std::string& pred_ndjson, double distance) {
        const auto c = clear::clear_counts(io::parse_scene_text(gt_text),
                                           io::parse_tracking_output_text(pred_ndjson), distance);
        py::dict d;
        d["tp"] = c.tp;
        d["fp"] = c.fp;
        d["fn"] = c.fn;
        d["idsw"] = c.idsw;
        d["gt_count"] = c.gt_count;
        d["mota"] = c.mota;
        return d;
      },
      py::arg("gt"), py::arg("pred"), py::arg("distance") = 2.0);

  m.def(
      "evaluate_motion",
      [](const std::string& gt_text, const std::string& pred_ndjson) {
        return metrics::motion_report_json(
            metrics::evaluate_motion(io::parse_scene_text(gt_text),
                                     io::parse_tracking_output_text(pred_ndjson), {}));
      },
      py::arg("gt"), py::arg("pred"), "Motion-metric report as JSON text.");

  m.def("vae", &metrics::vae, py::arg("theta_gt"), py::arg("theta_d"));
  m.def(
      "savitzky_golay",
      [](const std::vector<double>& series, int window, int order) {
        return metrics::savitzky_golay(series, {window, order});
      },
      py::arg("series"), py::arg("window") = 5, py::arg("order") = 2);
  m.def(
      "vde",
      [](const std::vector<double>& gt, const std::vector<double>& tracked, int window,
         int max_shift) {
        const auto r = metrics::vde(gt, tracked, window, max_shift);
        return py::make_tuple(r.frames, r.per_peak_shift);
      },
      py::arg("gt"), py::arg("tracked"), py::arg("window") = 10, py::arg("max_shift") = 10);

  m.def(
      "cli_main",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"mctrack"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
