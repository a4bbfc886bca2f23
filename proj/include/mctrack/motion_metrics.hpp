#pragma once

#include "mctrack/baseversion_io.hpp"
#include "mctrack/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mctrack::metrics {

/// Savitzky-Golay window (odd, >= 3) and polynomial order (< window).
struct SGParams {
  int window = 5;
  int order = 2;

  void validate() const;
};

struct VelocitySeries {
  std::vector<double> timestamps;
  std::vector<Vec2> velocities;
};

/// Signed angular difference (theta_gt - theta_d + pi) mod 2pi - pi, mapped
/// into (-pi, pi].
double vae(double theta_gt, double theta_d);

struct InversionStats {
  std::optional<double> vaie;  // mean |error| over exceedances, radians
  double vir = 0.0;            // exceedances / N
  int exceedances = 0;
  int n = 0;
};

/// Throws EmptySeries for an empty input. Pairs are (theta_gt, theta_d).
InversionStats vaie_vir(std::span<const std::pair<double, double>> angle_pairs);

double vne(double speed_gt, double speed_d);

/// Centered least-squares polynomial smoothing. Near the ends the window is
/// truncated and the fit redone on the samples that remain.
std::vector<double> savitzky_golay(std::span<const double> series, const SGParams& params);

/// Mean absolute deviation between a speed series and its SG smoothing.
double vse(std::span<const double> speeds, const SGParams& params);

/// Strict interior local maxima.
std::vector<std::size_t> detect_peaks(std::span<const double> series);

struct VdeResult {
  double frames = 0.0;             // mean over peaks
  std::vector<int> per_peak_shift;
  std::vector<std::size_t> peaks;  // the peaks that had a full window
};

/// Peak-aligned delay of `tracked` behind `gt`: for every gt peak with a full
/// window, the shift in [0, max_shift] minimising mean + std of |differences|.
VdeResult vde(std::span<const double> gt, std::span<const double> tracked, int window,
              int max_shift);

VelocitySeries estimate_velocity_differentiation(std::span<const Vec2> positions,
                                                 std::span<const double> timestamps);

/// Per-sample slope of the least-squares line through the latest three
/// (frame number, coordinate) pairs, converted to m/s.
VelocitySeries estimate_velocity_curvefit(std::span<const Vec2> positions,
                                          std::span<const int> frame_numbers,
                                          std::span<const double> timestamps,
                                          double seconds_per_frame);

struct MotionEvalConfig {
  SGParams sg;
  int vde_window = 10;
  int vde_max_shift = 10;
  double vehicle_match_distance = 2.0;
  double other_match_distance = 1.0;
  // gt samples slower than this are left out of the angle metrics.
  double min_gt_speed = 0.2;
  bool sample_weighted = true;

  double match_distance(const std::string& category) const;
};

struct MotionReport {
  int tp = 0;
  int n_samples = 0;
  int n_trajectories = 0;
  int n_angle_samples = 0;
  int n_exceedances = 0;
  double vae_deg = 0.0;  // mean |VAE|
  double vne = 0.0;
  std::optional<double> vaie_deg;
  double vir = 0.0;
  std::optional<double> vse;
  std::optional<double> vde_frames;
  std::optional<double> vde_seconds;
  std::vector<double> signed_vae_deg;
};

struct TrajectorySample {
  double timestamp = 0.0;
  Vec2 v_gt = Vec2::Zero();
  Vec2 v_d = Vec2::Zero();
};

/// All six metrics for one (gt, track) trajectory.
MotionReport evaluate_trajectory(std::span<const TrajectorySample> samples,
                                 const MotionEvalConfig& cfg);

/// Greedy nearest-first pairing of gt boxes with tracked boxes of the same
/// category whose centers are within `max_distance(gt category)`.
std::vector<std::pair<std::size_t, std::size_t>> match_by_center(
    std::span<const DetectionBox> gt, std::span<const TrackedBox> tracked,
    const std::function<double(const std::string&)>& max_distance);

/// Matches tracked output to annotated boxes (instance_id required), stitches
/// per-(instance, track) series and aggregates their metrics.
MotionReport evaluate_motion(const SceneRecord& gt, std::span<const io::TrackingFrame> tracked,
                             const MotionEvalConfig& cfg);

enum class VelocityEstimator { kDifferentiation, kCurveFit };

/// Replaces every track's velocity with one re-derived from its emitted
/// positions, per track id, in frame order.
std::vector<io::TrackingFrame> reestimate_velocities(std::span<const io::TrackingFrame> frames,
                                                     VelocityEstimator method,
                                                     double seconds_per_frame);

/// JSON with the columns TP, VAE (deg), VNE (m/s), VDE (s and frames),
/// VSE (m/s), VAIE (deg), VIR (%).
std::string motion_report_json(const MotionReport& r);

}  // namespace mctrack::metrics
