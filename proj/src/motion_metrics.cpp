#include "mctrack/motion_metrics.hpp"

#include "mctrack/category_table.hpp"
#include "mctrack/errors.hpp"

#include <Eigen/QR>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <tuple>

namespace mctrack::metrics {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Value at offset 0 of the least-squares polynomial through (offsets, ys).
Eigen::RowVectorXd sg_weights(int first_offset, int count, int order) {
  const int deg = std::min(order, count - 1);
  Eigen::MatrixXd a(count, deg + 1);
  for (int r = 0; r < count; ++r) {
    const double x = first_offset + r;
    double p = 1.0;
    for (int c = 0; c <= deg; ++c) {
      a(r, c) = p;
      p *= x;
    }
  }
  // Row 0 of the pseudo-inverse gives the intercept as a linear combination.
  const Eigen::MatrixXd pinv = a.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(count, count));
  return pinv.row(0);
}

std::pair<double, double> mean_std(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

double slope_3pt(const double f[3], const double v[3]) {
  const double fm = (f[0] + f[1] + f[2]) / 3.0;
  const double vm = (v[0] + v[1] + v[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (f[i] - fm) * (v[i] - vm);
    den += (f[i] - fm) * (f[i] - fm);
  }
  return num / den;
}

double median_dt(std::span<const TrajectorySample> s) {
  std::vector<double> dts;
  for (std::size_t i = 1; i < s.size(); ++i) dts.push_back(s[i].timestamp - s[i - 1].timestamp);
  if (dts.empty()) return 0.0;
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2),
                   dts.end());
  return dts[dts.size() / 2];
}

}  // namespace

void SGParams::validate() const {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("SG window must be odd and >= 3");
  if (order < 0 || order >= window) throw std::invalid_argument("SG order must be in [0, window)");
}

double vae(double theta_gt, double theta_d) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double shifted = theta_gt - theta_d + std::numbers::pi;
  double r = shifted - kTwoPi * std::floor(shifted / kTwoPi) - std::numbers::pi;
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

InversionStats vaie_vir(std::span<const std::pair<double, double>> angle_pairs) {
  if (angle_pairs.empty()) throw EmptySeries("vaie_vir needs at least one angle pair");
  InversionStats out;
  out.n = static_cast<int>(angle_pairs.size());
  double sum = 0.0;
  for (const auto& [gt, d] : angle_pairs) {
    const double err = std::abs(vae(gt, d));
    if (err > 0.5 * std::numbers::pi) {
      ++out.exceedances;
      sum += err;
    }
  }
  out.vir = static_cast<double>(out.exceedances) / out.n;
  if (out.exceedances > 0) out.vaie = sum / out.exceedances;
  return out;
}

double vne(double speed_gt, double speed_d) { return std::abs(speed_gt - speed_d); }

std::vector<double> savitzky_golay(std::span<const double> series, const SGParams& params) {
  params.validate();
  const int n = static_cast<int>(series.size());
  if (n < params.window) {
    throw SeriesTooShort("SG smoothing needs at least " + std::to_string(params.window) +
                         " samples, got " + std::to_string(n));
  }
  const int half = params.window / 2;
  const Eigen::RowVectorXd interior = sg_weights(-half, params.window, params.order);

  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    const int count = hi - lo + 1;
    const Eigen::RowVectorXd w =
        count == params.window ? interior : sg_weights(lo - i, count, params.order);
    double acc = 0.0;
    for (int k = 0; k < count; ++k) acc += w(k) * series[static_cast<std::size_t>(lo + k)];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

double vse(std::span<const double> speeds, const SGParams& params) {
  const std::vector<double> smooth = savitzky_golay(speeds, params);
  double sum = 0.0;
  for (std::size_t i = 0; i < speeds.size(); ++i) sum += std::abs(speeds[i] - smooth[i]);
  return sum / static_cast<double>(speeds.size());
}

std::vector<std::size_t> detect_peaks(std::span<const double> series) {
  std::vector<std::size_t> peaks;
  for (std::size_t t = 1; t + 1 < series.size(); ++t) {
    if (series[t - 1] < series[t] && series[t] > series[t + 1]) peaks.push_back(t);
  }
  return peaks;
}

VdeResult vde(std::span<const double> gt, std::span<const double> tracked, int window,
              int max_shift) {
  if (gt.size() != tracked.size()) throw std::invalid_argument("vde series lengths differ");
  if (window < 1 || max_shift < 0) throw std::invalid_argument("vde window/shift out of range");
  const auto n = static_cast<long>(gt.size());
  if (n < window + max_shift) {
    throw SeriesTooShort("vde needs at least window + max_shift samples");
  }
  const long half = window / 2;

  VdeResult out;
  std::vector<double> diffs(static_cast<std::size_t>(window));
  for (std::size_t peak : detect_peaks(gt)) {
    const long start = static_cast<long>(peak) - half;
    if (start < 0 || start + window + max_shift > n) continue;
    int best_tau = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int tau = 0; tau <= max_shift; ++tau) {
      for (int j = 0; j < window; ++j) {
        diffs[static_cast<std::size_t>(j)] =
            std::abs(gt[static_cast<std::size_t>(start + j)] -
                     tracked[static_cast<std::size_t>(start + j + tau)]);
      }
      const auto [mu, sigma] = mean_std(diffs);
      if (mu + sigma < best) {
        best = mu + sigma;
        best_tau = tau;
      }
    }
    out.peaks.push_back(peak);
    out.per_peak_shift.push_back(best_tau);
  }
  if (out.peaks.empty()) throw NoPeaks("no ground-truth speed peak with a full window");
  out.frames = static_cast<double>(std::accumulate(out.per_peak_shift.begin(),
                                                   out.per_peak_shift.end(), 0)) /
               static_cast<double>(out.per_peak_shift.size());
  return out;
}

VelocitySeries estimate_velocity_differentiation(std::span<const Vec2> positions,
                                                 std::span<const double> timestamps) {
  if (positions.size() != timestamps.size()) throw std::invalid_argument("length mismatch");
  if (positions.size() < 2) throw SeriesTooShort("differentiation needs >= 2 samples");
  VelocitySeries out;
  out.timestamps.assign(timestamps.begin(), timestamps.end());
  out.velocities.resize(positions.size());
  for (std::size_t t = 1; t < positions.size(); ++t) {
    const double dt = timestamps[t] - timestamps[t - 1];
    if (!(dt > 0.0)) throw std::invalid_argument("timestamps must be strictly increasing");
    out.velocities[t] = (positions[t] - positions[t - 1]) / dt;
  }
  out.velocities[0] = out.velocities[1];
  return out;
}

VelocitySeries estimate_velocity_curvefit(std::span<const Vec2> positions,
                                          std::span<const int> frame_numbers,
                                          std::span<const double> timestamps,
                                          double seconds_per_frame) {
  if (positions.size() != frame_numbers.size() || positions.size() != timestamps.size()) {
    throw std::invalid_argument("length mismatch");
  }
  if (positions.size() < 3) throw SeriesTooShort("curve fitting needs >= 3 samples");
  if (!(seconds_per_frame > 0.0)) throw std::invalid_argument("seconds_per_frame must be > 0");
  VelocitySeries out;
  out.timestamps.assign(timestamps.begin(), timestamps.end());
  out.velocities.resize(positions.size());
  for (std::size_t t = 2; t < positions.size(); ++t) {
    const double f[3] = {static_cast<double>(frame_numbers[t - 2]),
                         static_cast<double>(frame_numbers[t - 1]),
                         static_cast<double>(frame_numbers[t])};
    const double xs[3] = {positions[t - 2].x(), positions[t - 1].x(), positions[t].x()};
    const double ys[3] = {positions[t - 2].y(), positions[t - 1].y(), positions[t].y()};
    out.velocities[t] = Vec2(slope_3pt(f, xs), slope_3pt(f, ys)) / seconds_per_frame;
  }
  out.velocities[0] = out.velocities[1] = out.velocities[2];
  return out;
}

double MotionEvalConfig::match_distance(const std::string& category) const {
  return is_vehicle_category(category) ? vehicle_match_distance : other_match_distance;
}

MotionReport evaluate_trajectory(std::span<const TrajectorySample> samples,
                                 const MotionEvalConfig& cfg) {
  MotionReport r;
  r.n_trajectories = samples.empty() ? 0 : 1;
  r.n_samples = static_cast<int>(samples.size());
  r.tp = r.n_samples;
  if (samples.empty()) return r;

  std::vector<double> gt_speed, d_speed;
  std::vector<std::pair<double, double>> angles;
  double vne_sum = 0.0;
  for (const auto& s : samples) {
    gt_speed.push_back(s.v_gt.norm());
    d_speed.push_back(s.v_d.norm());
    vne_sum += vne(gt_speed.back(), d_speed.back());
    if (gt_speed.back() >= cfg.min_gt_speed) {
      angles.emplace_back(std::atan2(s.v_gt.y(), s.v_gt.x()), std::atan2(s.v_d.y(), s.v_d.x()));
    }
  }
  r.vne = vne_sum / r.n_samples;

  if (!angles.empty()) {
    double abs_sum = 0.0;
    for (const auto& [gt, d] : angles) {
      const double e = vae(gt, d) * kRadToDeg;
      r.signed_vae_deg.push_back(e);
      abs_sum += std::abs(e);
    }
    r.vae_deg = abs_sum / static_cast<double>(angles.size());
    const InversionStats inv = vaie_vir(angles);
    r.n_angle_samples = inv.n;
    r.n_exceedances = inv.exceedances;
    r.vir = inv.vir;
    if (inv.vaie) r.vaie_deg = *inv.vaie * kRadToDeg;
  }

  if (static_cast<int>(d_speed.size()) >= cfg.sg.window) r.vse = vse(d_speed, cfg.sg);

  try {
    const VdeResult v = vde(gt_speed, d_speed, cfg.vde_window, cfg.vde_max_shift);
    r.vde_frames = v.frames;
    r.vde_seconds = v.frames * median_dt(samples);
  } catch (const SeriesTooShort&) {
  } catch (const NoPeaks&) {
  }
  return r;
}

std::vector<std::pair<std::size_t, std::size_t>> match_by_center(
    std::span<const DetectionBox> gt, std::span<const TrackedBox> tracked,
    const std::function<double(const std::string&)>& max_distance) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> cands;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const double limit = max_distance(gt[g].category);
    for (std::size_t t = 0; t < tracked.size(); ++t) {
      if (tracked[t].box.category != gt[g].category) continue;
      const double d = (gt[g].global_xyz.head<2>() - tracked[t].box.global_xyz.head<2>()).norm();
      if (d <= limit) cands.emplace_back(d, g, t);
    }
  }
  std::sort(cands.begin(), cands.end());
  std::vector<char> g_used(gt.size(), 0), t_used(tracked.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [d, g, t] : cands) {
    if (g_used[g] || t_used[t]) continue;
    g_used[g] = t_used[t] = 1;
    out.emplace_back(g, t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MotionReport evaluate_motion(const SceneRecord& gt, std::span<const io::TrackingFrame> tracked,
                             const MotionEvalConfig& cfg) {
  std::map<int, const io::TrackingFrame*> by_index;
  for (const auto& f : tracked) by_index[f.frame_index] = &f;

  std::map<std::pair<int, int>, std::vector<TrajectorySample>> series;
  int tp = 0;
  const auto limit = [&](const std::string& c) { return cfg.match_distance(c); };
  for (const auto& frame : gt.frames) {
    const auto it = by_index.find(frame.frame_index);
    if (it == by_index.end()) continue;
    const auto& boxes = it->second->boxes;
    for (const auto& [g, t] : match_by_center(frame.detections, boxes, limit)) {
      ++tp;
      const auto& gbox = frame.detections[g];
      if (!gbox.instance_id) continue;
      series[{*gbox.instance_id, boxes[t].track_id}].push_back(
          {frame.timestamp, gbox.global_velocity, boxes[t].estimated_velocity});
    }
  }

  MotionReport agg;
  agg.tp = tp;
  double w_vae = 0, w_vne = 0, w_vaie = 0, w_vir = 0, w_vse = 0, w_vde = 0;
  double s_vae = 0, s_vne = 0, s_vaie = 0, s_vir = 0, s_vse = 0, s_vde = 0, s_vde_s = 0;
  for (const auto& [key, samples] : series) {
    const MotionReport r = evaluate_trajectory(samples, cfg);
    agg.n_samples += r.n_samples;
    agg.n_trajectories += 1;
    agg.n_angle_samples += r.n_angle_samples;
    agg.n_exceedances += r.n_exceedances;
    agg.signed_vae_deg.insert(agg.signed_vae_deg.end(), r.signed_vae_deg.begin(),
                              r.signed_vae_deg.end());
    const bool per_sample = cfg.sample_weighted;
    const double wn = per_sample ? r.n_samples : 1.0;
    s_vne += wn * r.vne;
    w_vne += wn;
    if (r.n_angle_samples > 0) {
      const double wa = per_sample ? r.n_angle_samples : 1.0;
      s_vae += wa * r.vae_deg;
      w_vae += wa;
      s_vir += wa * r.vir;
      w_vir += wa;
    }
    if (r.vaie_deg) {
      const double we = per_sample ? r.n_exceedances : 1.0;
      s_vaie += we * *r.vaie_deg;
      w_vaie += we;
    }
    if (r.vse) {
      s_vse += wn * *r.vse;
      w_vse += wn;
    }
    if (r.vde_frames) {
      s_vde += wn * *r.vde_frames;
      s_vde_s += wn * *r.vde_seconds;
      w_vde += wn;
    }
  }
  if (w_vne > 0) agg.vne = s_vne / w_vne;
  if (w_vae > 0) agg.vae_deg = s_vae / w_vae;
  if (w_vir > 0) agg.vir = s_vir / w_vir;
  if (w_vaie > 0) agg.vaie_deg = s_vaie / w_vaie;
  if (w_vse > 0) agg.vse = s_vse / w_vse;
  if (w_vde > 0) {
    agg.vde_frames = s_vde / w_vde;
    agg.vde_seconds = s_vde_s / w_vde;
  }
  return agg;
}

std::vector<io::TrackingFrame> reestimate_velocities(std::span<const io::TrackingFrame> frames,
                                                     VelocityEstimator method,
                                                     double seconds_per_frame) {
  std::vector<io::TrackingFrame> out(frames.begin(), frames.end());
  // (frame position, box position) of every appearance, per track.
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> where;
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (std::size_t b = 0; b < out[f].boxes.size(); ++b) {
      where[out[f].boxes[b].track_id].emplace_back(f, b);
    }
  }
  for (const auto& [id, refs] : where) {
    std::vector<Vec2> pos;
    std::vector<double> ts;
    std::vector<int> fn;
    for (const auto& [f, b] : refs) {
      pos.push_back(out[f].boxes[b].box.global_xyz.head<2>());
      ts.push_back(out[f].timestamp);
      fn.push_back(out[f].frame_index);
    }
    const std::size_t need = method == VelocityEstimator::kDifferentiation ? 2 : 3;
    if (pos.size() < need) continue;
    const VelocitySeries v = method == VelocityEstimator::kDifferentiation
                                 ? estimate_velocity_differentiation(pos, ts)
                                 : estimate_velocity_curvefit(pos, fn, ts, seconds_per_frame);
    for (std::size_t k = 0; k < refs.size(); ++k) {
      auto& box = out[refs[k].first].boxes[refs[k].second];
      box.estimated_velocity = v.velocities[k];
      box.box.global_velocity = v.velocities[k];
    }
  }
  return out;
}

std::string motion_report_json(const MotionReport& r) {
  nlohmann::ordered_json j;
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["TP"] = r.tp;
  j["VAE_deg"] = r.vae_deg;
  j["VNE_mps"] = r.vne;
  j["VDE_s"] = opt(r.vde_seconds);
  j["VDE_frames"] = opt(r.vde_frames);
  j["VSE_mps"] = opt(r.vse);
  j["VAIE_deg"] = opt(r.vaie_deg);
  j["VIR_pct"] = 100.0 * r.vir;
  j["n_samples"] = r.n_samples;
  j["n_trajectories"] = r.n_trajectories;
  return j.dump(2) + "\n";
}

}  // namespace mctrack::metrics
