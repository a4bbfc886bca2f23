#include "mctrack/ablation.hpp"

#include "mctrack/baseversion_io.hpp"
#include "mctrack/config.hpp"
#include "mctrack/errors.hpp"

#include <json.hpp>

#include <cstdio>

namespace mctrack::ablation {

using json = nlohmann::json;

AblationGrid parse_ablation_grid_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation grid is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("ablation grid must be an object");
  AblationGrid g;
  for (const auto& [key, v] : j.items()) {
    if (!key.empty() && key.front() == '_') continue;
    if (key == "scenario") {
      g.scenario = scenario::parse_scenario_spec_text(v.dump());
    } else if (key == "config") {
      g.base = config::parse_tracker_config_text(v.dump());
    } else if (key == "seeds" || key == "n_seeds" || key == "cost_kinds" || key == "rv_enabled" ||
               key == "distance_threshold") {
      // handled below, once the scenario seed is known
    } else {
      throw ConfigError("ablation grid: unknown key '" + key + "'");
    }
  }
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) throw ConfigError("ablation grid: seeds must be a list");
    g.seeds.clear();
    for (const auto& s : j["seeds"]) {
      if (!s.is_number_unsigned()) throw ConfigError("ablation grid: seeds must be integers >= 0");
      g.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (j.contains("n_seeds")) {
    if (!j["n_seeds"].is_number_unsigned()) throw ConfigError("ablation grid: n_seeds must be >= 0");
    g.seeds.clear();
    for (std::uint64_t i = 0; i < j["n_seeds"].get<std::uint64_t>(); ++i) {
      g.seeds.push_back(g.scenario.seed + i);
    }
  }
  if (j.contains("cost_kinds")) {
    if (!j["cost_kinds"].is_array()) throw ConfigError("ablation grid: cost_kinds must be a list");
    g.cost_kinds.clear();
    for (const auto& c : j["cost_kinds"]) {
      if (!c.is_string()) throw ConfigError("ablation grid: cost_kinds must be strings");
      g.cost_kinds.push_back(association::cost_kind_from_string(c.get<std::string>()));
    }
  }
  if (j.contains("rv_enabled")) {
    const auto& r = j["rv_enabled"];
    g.rv_enabled.clear();
    if (r.is_boolean()) {
      g.rv_enabled.push_back(r.get<bool>());
    } else if (r.is_array()) {
      for (const auto& b : r) {
        if (!b.is_boolean()) throw ConfigError("ablation grid: rv_enabled must hold booleans");
        g.rv_enabled.push_back(b.get<bool>());
      }
    } else {
      throw ConfigError("ablation grid: rv_enabled must be a boolean or a list");
    }
  }
  if (j.contains("distance_threshold")) {
    if (!j["distance_threshold"].is_number() || !(j["distance_threshold"].get<double>() > 0.0)) {
      throw ConfigError("ablation grid: distance_threshold must be a number > 0");
    }
    g.distance_threshold = j["distance_threshold"].get<double>();
  }
  if (g.seeds.empty() || g.cost_kinds.empty() || g.rv_enabled.empty()) {
    throw ConfigError("ablation grid: seeds, cost_kinds and rv_enabled must be non-empty");
  }
  return g;
}

AblationGrid load_ablation_grid(const std::filesystem::path& path) {
  return parse_ablation_grid_text(io::read_file(path));
}

std::vector<AblationRow> run_ablation(const AblationGrid& grid) {
  std::vector<scenario::GeneratedScenario> scenes;
  for (auto seed : grid.seeds) {
    scenario::ScenarioSpec spec = grid.scenario;
    spec.seed = seed;
    scenes.push_back(scenario::generate_scenario(spec));
  }
  std::vector<AblationRow> rows;
  for (auto kind : grid.cost_kinds) {
    for (bool rv : grid.rv_enabled) {
      tracker::TrackerConfig cfg = grid.base;
      cfg.association.cost_kind = kind;
      cfg.rv_enabled = rv;
      AblationRow row;
      row.cost_kind = kind;
      row.rv_enabled = rv;
      double mota_sum = 0.0;
      for (const auto& s : scenes) {
        const auto boxes = tracker::run_scene(s.detections, cfg);
        const auto frames = io::make_tracking_frames(s.detections, boxes);
        const clear::ClearCounts c = clear::clear_counts(s.gt, frames, grid.distance_threshold);
        mota_sum += c.mota;
        row.totals.tp += c.tp;
        row.totals.fp += c.fp;
        row.totals.fn += c.fn;
        row.totals.idsw += c.idsw;
        row.totals.gt_count += c.gt_count;
        ++row.runs;
      }
      row.mean_mota = mota_sum / row.runs;
      if (row.totals.gt_count > 0) {
        row.totals.mota = 1.0 - static_cast<double>(row.totals.fp + row.totals.fn +
                                                    row.totals.idsw) /
                                    row.totals.gt_count;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string out = "cost_kind  BEV  RV  runs     MOTA      TP      FP      FN    IDSW\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-9s  %-3s  %-2s  %4d  %7.4f  %6d  %6d  %6d  %6d\n",
                  association::to_string(r.cost_kind).c_str(), "x", r.rv_enabled ? "x" : "-",
                  r.runs, r.mean_mota, r.totals.tp, r.totals.fp, r.totals.fn, r.totals.idsw);
    out += line;
  }
  return out;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["cost_kind"] = association::to_string(r.cost_kind);
    j["bev"] = true;
    j["rv_enabled"] = r.rv_enabled;
    j["runs"] = r.runs;
    j["mean_mota"] = r.mean_mota;
    j["tp"] = r.totals.tp;
    j["fp"] = r.totals.fp;
    j["fn"] = r.totals.fn;
    j["idsw"] = r.totals.idsw;
    j["gt_count"] = r.totals.gt_count;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

}  // namespace mctrack::ablation
