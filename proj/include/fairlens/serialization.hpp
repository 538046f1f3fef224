#pragma once

// JSON forms of the library's result types. Object keys come out sorted, so
// dumps are stable byte for byte.

#include <nlohmann/json.hpp>

#include "fairlens/audit_frame.hpp"
#include "fairlens/bias_taxonomy.hpp"
#include "fairlens/data_diagnostics.hpp"
#include "fairlens/fairness_metrics.hpp"
#include "fairlens/mitigation.hpp"

namespace fairlens {

nlohmann::json to_json(const ValidationReport& report);

nlohmann::json to_json(const MetricResult& result);
MetricResult metric_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TradeoffNote& note);
TradeoffNote tradeoff_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FairnessReport& report);
FairnessReport fairness_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Criterion& criterion);
/// Accepts {"metric": m, "epsilon": e} or the "metric:eps" string form.
Criterion criterion_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiagnosticPolicy& policy);
/// Keys absent from `j` keep their defaults; unknown keys are an error.
DiagnosticPolicy diagnostic_policy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiagnosticResult& result);
DiagnosticResult diagnostic_result_from_json(const nlohmann::json& j);

/// {"group label": share, ...}
GroupShares group_shares_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ThresholdPolicy& policy);
nlohmann::json to_json(const MitigationProvenance& provenance);

nlohmann::json to_json(const BiasEntry& entry);
nlohmann::json to_json(const AssessmentRow& row);
AssessmentRow assessment_row_from_json(const nlohmann::json& j);

}  // namespace fairlens
