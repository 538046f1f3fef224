#pragma once

#include <array>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairlens {

enum class BiasCategory { world, data, design, ecosystem, cognition };

enum class FairnessType {
  data,
  application,
  model_design_development,
  metric_based,
  system_implementation,
  ecosystem,
};

inline constexpr std::array kAllCategories{BiasCategory::world, BiasCategory::data, BiasCategory::design,
                                           BiasCategory::ecosystem, BiasCategory::cognition};
inline constexpr std::array kAllFairnessTypes{FairnessType::data,
                                              FairnessType::application,
                                              FairnessType::model_design_development,
                                              FairnessType::metric_based,
                                              FairnessType::system_implementation,
                                              FairnessType::ecosystem};

/// "World", "Data", ...
std::string_view to_string(BiasCategory category);
/// "Data Fairness", "Metric-Based Fairness", ...
std::string_view to_string(FairnessType type);
/// Case-insensitive; accepts "World" or "World Bias".
BiasCategory parse_category(std::string_view text);
/// Case-insensitive; accepts the display name or a slug such as "metric_based".
FairnessType parse_fairness_type(std::string_view text);

inline constexpr int kStageCount = 12;

/// Lifecycle stage name for index 1..12. Throws InputError otherwise.
std::string_view stage_name(int index);
/// Accepts the index ("5") or the exact name.
int parse_stage(std::string_view text);

struct BiasEntry {
  std::string id;
  std::string name;
  BiasCategory category = BiasCategory::world;
  std::string description;
  /// Stages the bias can affect, ascending. Queries and scaffolds match on this.
  std::vector<int> lifecycle_stages;
  /// Stages singled out as most exposed; may be empty.
  std::vector<int> significant_stages;
  std::vector<FairnessType> fairness_types;
  /// Short verbatim phrase from the source text, for traceability.
  std::string anchor;
  std::string notes;
};

/// All entries, in category order and then source order.
const std::vector<BiasEntry>& registry();
const BiasEntry& find_bias(std::string_view id);

/// Empty sets do not constrain. Non-empty sets match entries that intersect them.
struct BiasQuery {
  std::set<BiasCategory> categories;
  std::set<int> stages;
  std::set<FairnessType> fairness_types;
};

std::vector<BiasEntry> query(const BiasQuery& q);

struct AssessmentRow {
  int stage = 1;
  std::string bias_id;
  /// e.g. "World Bias".
  std::string category;
  std::string risk_mitigation_action;
};

/// One blank row per (stage, bias covering the stage), stages in the given order.
std::vector<AssessmentRow> scaffold_assessment(std::span<const int> stages);

}  // namespace fairlens
