#include "mctrack/clear_metrics.hpp"

#include "mctrack/motion_metrics.hpp"

#include <json.hpp>

#include <map>
#include <set>

namespace mctrack::clear {

ClearCounts clear_counts(const SceneRecord& gt, std::span<const io::TrackingFrame> tracked,
                         double distance_threshold) {
  std::map<int, const io::TrackingFrame*> by_index;
  for (const auto& f : tracked) by_index[f.frame_index] = &f;

  ClearCounts c;
  std::map<int, int> last_track;
  std::set<int> seen_frames;
  const auto limit = [distance_threshold](const std::string&) { return distance_threshold; };
  for (const auto& frame : gt.frames) {
    seen_frames.insert(frame.frame_index);
    c.gt_count += static_cast<int>(frame.detections.size());
    const auto it = by_index.find(frame.frame_index);
    if (it == by_index.end()) {
      c.fn += static_cast<int>(frame.detections.size());
      continue;
    }
    const auto& boxes = it->second->boxes;
    const auto pairs = metrics::match_by_center(frame.detections, boxes, limit);
    c.tp += static_cast<int>(pairs.size());
    c.fn += static_cast<int>(frame.detections.size() - pairs.size());
    c.fp += static_cast<int>(boxes.size() - pairs.size());
    for (const auto& [g, t] : pairs) {
      const auto& gbox = frame.detections[g];
      const int identity = gbox.instance_id ? *gbox.instance_id : static_cast<int>(g);
      const int track_id = boxes[t].track_id;
      const auto prev = last_track.find(identity);
      if (prev != last_track.end() && prev->second != track_id) ++c.idsw;
      last_track[identity] = track_id;
    }
  }
  for (const auto& f : tracked) {
    if (!seen_frames.count(f.frame_index)) c.fp += static_cast<int>(f.boxes.size());
  }
  if (c.gt_count > 0) {
    c.mota = 1.0 - static_cast<double>(c.fp + c.fn + c.idsw) / c.gt_count;
  }
  return c;
}

std::string clear_counts_json(const ClearCounts& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["idsw"] = c.idsw;
  j["gt_count"] = c.gt_count;
  j["mota"] = c.mota;
  return j.dump(2) + "\n";
}

}  // namespace mctrack::clear
