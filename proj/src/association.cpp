#include "mctrack/association.hpp"

#include "mctrack/errors.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <tuple>

namespace mctrack::association {

namespace {

// Shortest augmenting path with potentials (Jonker-Volgenant style
// Kuhn-Munkres) for rows <= cols. Returns the column of every row.
std::vector<int> solve_rows_le_cols(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

MatchSet assemble(const CostMatrix& cost, const std::vector<int>& row_to_col) {
  MatchSet out;
  std::vector<char> col_used(static_cast<std::size_t>(cost.cols()), 0);
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    const int c = row_to_col[static_cast<std::size_t>(r)];
    if (c >= 0) {
      out.pairs.emplace_back(cost.row_ids[r], cost.col_ids[c]);
      col_used[c] = 1;
    } else {
      out.unmatched_detections.push_back(cost.row_ids[r]);
    }
  }
  for (Eigen::Index c = 0; c < cost.cols(); ++c) {
    if (!col_used[c]) out.unmatched_tracks.push_back(cost.col_ids[c]);
  }
  return out;
}

void check_shape(const CostMatrix& cost) {
  if (static_cast<Eigen::Index>(cost.row_ids.size()) != cost.rows() ||
      static_cast<Eigen::Index>(cost.col_ids.size()) != cost.cols()) {
    throw std::invalid_argument("cost matrix ids do not match its shape");
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::kRoGdiou:
      return "ro_gdiou";
    case CostKind::kGiou:
      return "giou";
    case CostKind::kDiou:
      return "diou";
  }
  return "ro_gdiou";
}

CostKind cost_kind_from_string(const std::string& s) {
  if (s == "ro_gdiou") return CostKind::kRoGdiou;
  if (s == "giou") return CostKind::kGiou;
  if (s == "diou") return CostKind::kDiou;
  throw ConfigError("unknown cost_kind '" + s + "' (expected ro_gdiou, giou or diou)");
}

void AssocConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  weights.validate();
}

geometry::Box7 backward_predict(const DetectionBox& det, double dt) {
  geometry::Box7 b = geometry::box_from_detection(det);
  b.x -= det.global_velocity.x() * dt;
  b.y -= det.global_velocity.y() * dt;
  return b;
}

geometry::Box7 forward_predict(const TrackSnapshot& track, double dt) {
  geometry::Box7 b = track.box;
  b.x += track.velocity.x() * dt;
  b.y += track.velocity.y() * dt;
  return b;
}

double similarity(const geometry::Box7& a, const geometry::Box7& b, const AssocConfig& cfg) {
  switch (cfg.cost_kind) {
    case CostKind::kRoGdiou:
      return geometry::ro_gdiou(a, b, cfg.weights);
    case CostKind::kGiou:
      return geometry::giou_bev(a, b);
    case CostKind::kDiou:
      return geometry::diou_bev(a, b);
  }
  return geometry::ro_gdiou(a, b, cfg.weights);
}

CostMatrix bidirectional_cost(std::span<const DetectionBox> dets,
                              std::span<const TrackSnapshot> tracks, double det_time,
                              const AssocConfig& cfg) {
  CostMatrix out;
  out.values.resize(static_cast<Eigen::Index>(dets.size()),
                    static_cast<Eigen::Index>(tracks.size()));
  for (std::size_t i = 0; i < dets.size(); ++i) out.row_ids.push_back(static_cast<int>(i));
  for (const auto& t : tracks) out.col_ids.push_back(t.track_id);

  for (std::size_t i = 0; i < dets.size(); ++i) {
    const geometry::Box7 det_box = geometry::box_from_detection(dets[i]);
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const auto& trk = tracks[j];
      double& entry = out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (dets[i].category != trk.category) {
        entry = kForbiddenCost;
        continue;
      }
      const double dt = det_time - trk.timestamp;
      if (!(dt > 0.0)) throw NonPositiveDt("association requires detections newer than tracks");
      double sim = 0.0;
      if (cfg.alpha > 0.0) {
        sim += cfg.alpha * similarity(det_box, forward_predict(trk, dt), cfg);
      }
      if (cfg.alpha < 1.0) {
        sim += (1.0 - cfg.alpha) * similarity(backward_predict(dets[i], dt), trk.box, cfg);
      }
      entry = -sim;
    }
  }
  return out;
}

MatchSet hungarian(const CostMatrix& cost, double threshold) {
  check_shape(cost);
  const Eigen::Index n = cost.rows(), m = cost.cols();
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const double v = cost.values(r, c);
      if (v <= threshold) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (n == 0 || m == 0 || lo > hi) return assemble(cost, row_to_col);

  // Inadmissible entries get a cost large enough that trading one of them
  // for any admissible pair always lowers the total.
  const double big = hi + (hi - lo + 1.0) * static_cast<double>(std::min(n, m) + 1);
  Eigen::MatrixXd work = cost.values.unaryExpr([&](double v) { return v <= threshold ? v : big; });

  if (n <= m) {
    row_to_col = solve_rows_le_cols(work);
  } else {
    const std::vector<int> col_to_row = solve_rows_le_cols(work.transpose());
    for (Eigen::Index c = 0; c < m; ++c) {
      const int r = col_to_row[static_cast<std::size_t>(c)];
      if (r >= 0) row_to_col[static_cast<std::size_t>(r)] = static_cast<int>(c);
    }
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    int& c = row_to_col[static_cast<std::size_t>(r)];
    if (c >= 0 && !(cost.values(r, c) <= threshold)) c = -1;
  }
  return assemble(cost, row_to_col);
}

MatchSet greedy(const CostMatrix& cost, double threshold) {
  check_shape(cost);
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> entries;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    for (Eigen::Index c = 0; c < cost.cols(); ++c) {
      if (cost.values(r, c) <= threshold) entries.emplace_back(cost.values(r, c), r, c);
    }
  }
  std::sort(entries.begin(), entries.end());

  std::vector<int> row_to_col(static_cast<std::size_t>(cost.rows()), -1);
  std::vector<char> col_used(static_cast<std::size_t>(cost.cols()), 0);
  for (const auto& [v, r, c] : entries) {
    auto& slot = row_to_col[static_cast<std::size_t>(r)];
    if (slot >= 0 || col_used[static_cast<std::size_t>(c)]) continue;
    slot = static_cast<int>(c);
    col_used[static_cast<std::size_t>(c)] = 1;
  }
  return assemble(cost, row_to_col);
}

double total_cost(const CostMatrix& cost, const MatchSet& m) {
  double total = 0.0;
  for (const auto& [d, t] : m.pairs) {
    const auto r = std::find(cost.row_ids.begin(), cost.row_ids.end(), d) - cost.row_ids.begin();
    const auto c = std::find(cost.col_ids.begin(), cost.col_ids.end(), t) - cost.col_ids.begin();
    total += cost.values(r, c);
  }
  return total;
}

const CameraCalib* select_rv_camera(const FrameRecord& frame) {
  if (frame.camera_calibrations.empty()) return nullptr;
  for (const auto& cam : frame.camera_calibrations) {
    if (lower(cam.camera_id).find("front") != std::string::npos) return &cam;
  }
  return &frame.camera_calibrations.front();
}

MatchSet two_stage_match(std::span<const DetectionBox> dets, std::span<const TrackSnapshot> tracks,
                         const FrameRecord& frame, const AssocConfig& cfg, bool rv_enabled) {
  // Stage 1: bird's-eye view.
  CostMatrix bev = bidirectional_cost(dets, tracks, frame.timestamp, cfg);
  double gate = -std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < bev.rows(); ++r) {
    const double row_gate = -cfg.threshold_bev.at(dets[static_cast<std::size_t>(r)].category);
    gate = std::max(gate, row_gate);
    for (Eigen::Index c = 0; c < bev.cols(); ++c) {
      if (bev.values(r, c) > row_gate) bev.values(r, c) = kForbiddenCost;
    }
  }
  MatchSet result = hungarian(bev, std::min(gate, 0.5 * kForbiddenCost));
  std::sort(result.unmatched_tracks.begin(), result.unmatched_tracks.end());

  const CameraCalib* cam = rv_enabled ? select_rv_camera(frame) : nullptr;
  if (cam == nullptr || result.unmatched_detections.empty() || result.unmatched_tracks.empty()) {
    return result;
  }

  // Stage 2: image plane, on whatever stage 1 left behind and the camera sees.
  std::vector<std::pair<int, geometry::Rect2D>> det_rects, trk_rects;
  std::vector<int> hidden_dets, hidden_trks;
  for (int d : result.unmatched_detections) {
    const auto rect = geometry::project_box_to_image(
        geometry::box_from_detection(dets[static_cast<std::size_t>(d)]), *cam);
    if (rect) {
      det_rects.emplace_back(d, *rect);
    } else {
      hidden_dets.push_back(d);
    }
  }
  std::vector<const TrackSnapshot*> trk_by_col;
  for (int t : result.unmatched_tracks) {
    const auto it = std::find_if(tracks.begin(), tracks.end(),
                                 [t](const TrackSnapshot& s) { return s.track_id == t; });
    const double dt = frame.timestamp - it->timestamp;
    const auto rect = geometry::project_box_to_image(forward_predict(*it, dt), *cam);
    if (rect) {
      trk_rects.emplace_back(t, *rect);
      trk_by_col.push_back(&*it);
    } else {
      hidden_trks.push_back(t);
    }
  }

  CostMatrix rv;
  rv.values.resize(static_cast<Eigen::Index>(det_rects.size()),
                   static_cast<Eigen::Index>(trk_rects.size()));
  double rv_gate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < det_rects.size(); ++i) {
    const auto& det = dets[static_cast<std::size_t>(det_rects[i].first)];
    const double row_gate = -cfg.threshold_rv.at(det.category);
    rv_gate = std::max(rv_gate, row_gate);
    rv.row_ids.push_back(det_rects[i].first);
    for (std::size_t j = 0; j < trk_rects.size(); ++j) {
      double v = -geometry::sdiou_rv(det_rects[i].second, trk_rects[j].second);
      if (det.category != trk_by_col[j]->category || v > row_gate) v = kForbiddenCost;
      rv.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  for (const auto& [t, rect] : trk_rects) rv.col_ids.push_back(t);
  const MatchSet second = greedy(rv, std::min(rv_gate, 0.5 * kForbiddenCost));

  MatchSet merged;
  merged.pairs = result.pairs;
  merged.pairs.insert(merged.pairs.end(), second.pairs.begin(), second.pairs.end());
  std::sort(merged.pairs.begin(), merged.pairs.end());
  merged.unmatched_detections = second.unmatched_detections;
  merged.unmatched_detections.insert(merged.unmatched_detections.end(), hidden_dets.begin(),
                                     hidden_dets.end());
  std::sort(merged.unmatched_detections.begin(), merged.unmatched_detections.end());
  merged.unmatched_tracks = second.unmatched_tracks;
  merged.unmatched_tracks.insert(merged.unmatched_tracks.end(), hidden_trks.begin(),
                                 hidden_trks.end());
  std::sort(merged.unmatched_tracks.begin(), merged.unmatched_tracks.end());
  return merged;
}

}  // namespace mctrack::association
