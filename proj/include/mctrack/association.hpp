#pragma once

#include "mctrack/category_table.hpp"
#include "mctrack/geometry.hpp"
#include "mctrack/types.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mctrack::association {

enum class CostKind { kRoGdiou, kGiou, kDiou };

std::string to_string(CostKind k);
CostKind cost_kind_from_string(const std::string& s);

/// Rows are detections, columns tracks. Lower is better.
struct CostMatrix {
  Eigen::MatrixXd values;
  std::vector<int> row_ids;
  std::vector<int> col_ids;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct MatchSet {
  std::vector<std::pair<int, int>> pairs;  // (detection id, track id)
  std::vector<int> unmatched_detections;
  std::vector<int> unmatched_tracks;

  friend bool operator==(const MatchSet&, const MatchSet&) = default;
};

/// Thresholds are similarities: a pair is admissible when its similarity is
/// at least the threshold of the detection's category.
struct AssocConfig {
  double alpha = 0.5;
  geometry::IouWeights weights;
  CategoryTable<double> threshold_bev{-0.5, {}};
  CategoryTable<double> threshold_rv{0.0, {}};
  CostKind cost_kind = CostKind::kRoGdiou;

  void validate() const;
};

/// A track as seen by association: its filtered box at the previous frame.
struct TrackSnapshot {
  int track_id = 0;
  std::string category;
  geometry::Box7 box;
  Vec2 velocity = Vec2::Zero();
  double timestamp = 0.0;
};

/// Entries that can never be matched (category mismatch, gated out).
inline constexpr double kForbiddenCost = 1e6;

/// Constant-velocity rewind of a detection by dt.
geometry::Box7 backward_predict(const DetectionBox& det, double dt);
/// Constant-velocity advance of a track's box by dt.
geometry::Box7 forward_predict(const TrackSnapshot& track, double dt);

double similarity(const geometry::Box7& a, const geometry::Box7& b, const AssocConfig& cfg);

/// Entry (i, j) = -[alpha * sim(d_i, fwd(t_j)) + (1 - alpha) * sim(back(d_i), t_j)]
/// with dt = det_time - t_j.timestamp. Cross-category entries are kForbiddenCost.
CostMatrix bidirectional_cost(std::span<const DetectionBox> dets,
                              std::span<const TrackSnapshot> tracks, double det_time,
                              const AssocConfig& cfg);

/// Minimum-cost assignment over entries <= threshold; solved pairs above the
/// threshold end up unmatched.
MatchSet hungarian(const CostMatrix& cost, double threshold);

/// Repeatedly commits the smallest remaining entry <= threshold. Ties go to
/// the smaller row, then the smaller column.
MatchSet greedy(const CostMatrix& cost, double threshold);

/// Sum of the matched entries, accumulated in detection order.
double total_cost(const CostMatrix& cost, const MatchSet& m);

/// The camera used for image-plane matching, preferring a front camera.
const CameraCalib* select_rv_camera(const FrameRecord& frame);

/// BEV Hungarian stage, then image-plane greedy stage on the leftovers.
/// Detection ids are indices into `dets`.
MatchSet two_stage_match(std::span<const DetectionBox> dets, std::span<const TrackSnapshot> tracks,
                         const FrameRecord& frame, const AssocConfig& cfg, bool rv_enabled = true);

}  // namespace mctrack::association
