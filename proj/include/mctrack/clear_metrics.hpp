#pragma once

#include "mctrack/baseversion_io.hpp"
#include "mctrack/types.hpp"

#include <span>
#include <string>

namespace mctrack::clear {

struct ClearCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int idsw = 0;
  int gt_count = 0;
  double mota = 0.0;  // 1 - (fp + fn + idsw) / gt_count, 0 when gt_count is 0

  friend bool operator==(const ClearCounts&, const ClearCounts&) = default;
};

/// Per-frame greedy center matching (same category, within
/// `distance_threshold` meters). A gt identity is its instance_id, or its
/// position in the frame when absent. An identity switch is counted when the
/// track matched to a gt identity differs from the one at its previous
/// matched frame. Tracked frames without a gt frame count as false positives.
ClearCounts clear_counts(const SceneRecord& gt, std::span<const io::TrackingFrame> tracked,
                         double distance_threshold);

std::string clear_counts_json(const ClearCounts& c);

}  // namespace mctrack::clear
