#pragma once

#include "mctrack/association.hpp"
#include "mctrack/clear_metrics.hpp"
#include "mctrack/scenario.hpp"
#include "mctrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mctrack::ablation {

struct AblationGrid {
  scenario::ScenarioSpec scenario;
  // Each seed replaces scenario.seed for one run.
  std::vector<std::uint64_t> seeds{0};
  std::vector<association::CostKind> cost_kinds{association::CostKind::kRoGdiou,
                                                association::CostKind::kGiou,
                                                association::CostKind::kDiou};
  std::vector<bool> rv_enabled{false, true};
  tracker::TrackerConfig base;
  double distance_threshold = 2.0;
};

struct AblationRow {
  association::CostKind cost_kind = association::CostKind::kRoGdiou;
  bool rv_enabled = false;
  int runs = 0;
  double mean_mota = 0.0;
  clear::ClearCounts totals;  // summed over seeds; mota recomputed from the sums
};

/// Keys: scenario (object), seeds (list) or n_seeds (consecutive from
/// scenario.seed), cost_kinds, rv_enabled, config (tracker config document),
/// distance_threshold.
AblationGrid parse_ablation_grid_text(std::string_view text);
AblationGrid load_ablation_grid(const std::filesystem::path& path);

/// One row per (cost kind, rv switch), in grid order.
std::vector<AblationRow> run_ablation(const AblationGrid& grid);

std::string ablation_table(const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace mctrack::ablation
