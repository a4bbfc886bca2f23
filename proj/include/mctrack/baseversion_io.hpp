#pragma once

#include "mctrack/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mctrack::io {

/// Category names accepted when a scene does not declare its own list.
const std::vector<std::string>& builtin_categories();

/// Reads a BaseVersion scene document and validates every invariant of the
/// data model. Non-fatal findings (defaulted fields) go to `warnings`.
///
/// Throws MalformedDocument on JSON syntax errors, SchemaViolation on missing
/// or mistyped fields and ordering errors, InvariantViolation on bad values.
SceneRecord parse_scene(const std::filesystem::path& path,
                        std::vector<std::string>* warnings = nullptr);
SceneRecord parse_scene_text(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Checks the invariants of an in-memory scene (the same checks parse_scene runs).
void validate_scene(const SceneRecord& scene);

/// Canonical BaseVersion document, two-space indented, trailing newline.
std::string serialize_scene(const SceneRecord& scene);
void write_scene(const SceneRecord& scene, const std::filesystem::path& path);

/// One line of the tracking output.
struct TrackingFrame {
  std::string scene_id;
  int frame_index = 0;
  double timestamp = 0.0;
  std::vector<TrackedBox> boxes;
};

std::vector<TrackingFrame> make_tracking_frames(const SceneRecord& scene,
                                                std::span<const std::vector<TrackedBox>> boxes);

/// Newline-delimited JSON, one object per frame. Throws DuplicateTrackId when
/// a frame repeats a track id.
std::string serialize_tracking_output(std::span<const TrackingFrame> frames);
void write_tracking_output(std::span<const TrackingFrame> frames, const std::filesystem::path& path);

std::vector<TrackingFrame> parse_tracking_output_text(std::string_view text);
std::vector<TrackingFrame> read_tracking_output(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mctrack::io
