#include "fairlens/bias_taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "fairlens/error.hpp"
#include "taxonomy_data.hpp"

namespace fairlens {

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames{"World", "Data", "Design", "Ecosystem", "Cognition"};
constexpr std::array<std::string_view, 6> kFairnessNames{"Data Fairness",
                                                         "Application Fairness",
                                                         "Model Design and Development Fairness",
                                                         "Metric-Based Fairness",
                                                         "System Implementation Fairness",
                                                         "Ecosystem Fairness"};
constexpr std::array<std::string_view, 6> kFairnessSlugs{"data", "application", "model_design_development",
                                                         "metric_based", "system_implementation", "ecosystem"};
constexpr std::array<std::string_view, kStageCount> kStageNames{"Project Planning",
                                                                "Problem Formulation",
                                                                "Data Extraction or Procurement",
                                                                "Data Analysis",
                                                                "Preprocessing & Feature Engineering",
                                                                "Model Selection & Training",
                                                                "Model Testing & Validation",
                                                                "Model Reporting",
                                                                "System Implementation",
                                                                "User Training",
                                                                "System Use & Monitoring",
                                                                "Model Updating or Deprovisioning"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

template <class T>
bool intersects(const std::vector<T>& values, const std::set<T>& wanted) {
  return wanted.empty() ||
         std::any_of(values.begin(), values.end(), [&](const T& v) { return wanted.count(v) > 0; });
}

void check_stage(int index) {
  if (index < 1 || index > kStageCount) {
    throw InputError("lifecycle stage must be 1.." + std::to_string(kStageCount) + ", got " + std::to_string(index));
  }
}

}  // namespace

std::string_view to_string(BiasCategory category) { return kCategoryNames[static_cast<std::size_t>(category)]; }
std::string_view to_string(FairnessType type) { return kFairnessNames[static_cast<std::size_t>(type)]; }

BiasCategory parse_category(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    const std::string with_suffix = std::string(kCategoryNames[i]) + " Bias";
    if (iequals(text, kCategoryNames[i]) || iequals(text, with_suffix) || iequals(text, with_suffix + "es")) {
      return static_cast<BiasCategory>(i);
    }
  }
  throw InputError("unknown bias category '" + std::string(text) + "'");
}

FairnessType parse_fairness_type(std::string_view text) {
  for (std::size_t i = 0; i < kFairnessNames.size(); ++i) {
    if (iequals(text, kFairnessNames[i]) || iequals(text, kFairnessSlugs[i])) return static_cast<FairnessType>(i);
  }
  throw InputError("unknown fairness type '" + std::string(text) + "'");
}

std::string_view stage_name(int index) {
  check_stage(index);
  return kStageNames[static_cast<std::size_t>(index - 1)];
}

int parse_stage(std::string_view text) {
  int index = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec == std::errc() && end == text.data() + text.size()) {
    check_stage(index);
    return index;
  }
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (iequals(text, kStageNames[i])) return static_cast<int>(i) + 1;
  }
  throw InputError("unknown lifecycle stage '" + std::string(text) + "'");
}

const std::vector<BiasEntry>& registry() {
  static const std::vector<BiasEntry> entries = detail::build_registry();
  return entries;
}

const BiasEntry& find_bias(std::string_view id) {
  for (const auto& e : registry()) {
    if (e.id == id) return e;
  }
  throw InputError("unknown bias id '" + std::string(id) + "'");
}

std::vector<BiasEntry> query(const BiasQuery& q) {
  for (int s : q.stages) check_stage(s);
  std::vector<BiasEntry> out;
  for (const auto& e : registry()) {
    if (!q.categories.empty() && !q.categories.count(e.category)) continue;
    if (!intersects(e.lifecycle_stages, q.stages)) continue;
    if (!intersects(e.fairness_types, q.fairness_types)) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<AssessmentRow> scaffold_assessment(std::span<const int> stages) {
  if (stages.empty()) throw InputError("bias assessment needs at least one lifecycle stage");
  for (int s : stages) check_stage(s);
  std::vector<AssessmentRow> rows;
  for (int s : stages) {
    for (const auto& e : registry()) {
      if (std::find(e.lifecycle_stages.begin(), e.lifecycle_stages.end(), s) == e.lifecycle_stages.end()) continue;
      rows.push_back({s, e.id, std::string(to_string(e.category)) + " Bias", ""});
    }
  }
  return rows;
}

}  // namespace fairlens
