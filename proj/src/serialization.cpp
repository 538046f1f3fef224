#include "fairlens/serialization.hpp"

#include <set>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json key_list(const std::vector<GroupKey>& keys) {
  json out = json::array();
  for (const auto& k : keys) out.push_back(k.label());
  return out;
}

std::vector<GroupKey> key_list_from(const json& j) {
  std::vector<GroupKey> out;
  for (const auto& label : j) out.push_back(GroupKey::parse(label.get<std::string>()));
  return out;
}

std::string_view policy_name(UndefinedPolicy p) { return p == UndefinedPolicy::strict ? "strict" : "lenient"; }

UndefinedPolicy parse_policy(std::string_view text) {
  if (text == "strict") return UndefinedPolicy::strict;
  if (text == "lenient") return UndefinedPolicy::lenient;
  throw InputError("unknown undefined-rate policy '" + std::string(text) + "'");
}

double timestamp_from(const json& j) {
  const auto t = parse_timestamp(j.get<std::string>());
  if (!t) throw InputError("invalid timestamp '" + j.get<std::string>() + "'");
  return *t;
}

}  // namespace

json to_json(const ValidationReport& report) {
  auto issues = [](const std::vector<ValidationIssue>& list) {
    json out = json::array();
    for (const auto& i : list) {
      out.push_back({{"column", i.column}, {"row", i.row ? json(*i.row) : json(nullptr)}, {"message", i.message}});
    }
    return out;
  };
  return {{"errors", issues(report.errors)}, {"warnings", issues(report.warnings)}, {"usable", report.usable()}};
}

json to_json(const MetricResult& r) {
  json groups = json::object();
  for (const auto& [key, v] : r.per_group) {
    if (const auto* single = std::get_if<std::optional<double>>(&v)) {
      groups[key.label()] = optional_number(*single);
    } else {
      const auto& pair = std::get<RatePair>(v);
      groups[key.label()] = {{"tpr", optional_number(pair.tpr)}, {"fpr", optional_number(pair.fpr)}};
    }
  }
  json j = {{"metric", std::string(to_string(r.metric))},
            {"per_group", groups},
            {"gap", r.gap},
            {"ratio", r.ratio},
            {"epsilon", r.epsilon},
            {"passed", r.passed},
            {"undefined_groups", key_list(r.undefined_groups)},
            {"low_confidence_groups", key_list(r.low_confidence_groups)},
            {"note", r.note}};
  if (is_group_metric(r.metric)) {
    j["four_fifths_reference"] = kFourFifthsReference;
    j["four_fifths_met"] = r.ratio >= kFourFifthsReference;
  }
  return j;
}

MetricResult metric_result_from_json(const json& j) {
  MetricResult r;
  r.metric = parse_metric(j.at("metric").get<std::string>());
  for (const auto& [label, v] : j.at("per_group").items()) {
    GroupValue value;
    if (v.is_object()) {
      value = RatePair{number_or_null(v.at("tpr")), number_or_null(v.at("fpr"))};
    } else {
      value = number_or_null(v);
    }
    r.per_group.emplace(GroupKey::parse(label), value);
  }
  r.gap = j.at("gap").get<double>();
  r.ratio = j.at("ratio").get<double>();
  r.epsilon = j.at("epsilon").get<double>();
  r.passed = j.at("passed").get<bool>();
  r.undefined_groups = key_list_from(j.at("undefined_groups"));
  r.low_confidence_groups = key_list_from(j.at("low_confidence_groups"));
  r.note = j.value("note", "");
  return r;
}

json to_json(const TradeoffNote& note) {
  json rates = json::object();
  for (const auto& [key, v] : note.base_rates) rates[key.label()] = v;
  return {{"base_rates", rates},
          {"base_rates_equal_within", note.base_rates_equal_within},
          {"conflict_flag", note.conflict_flag},
          {"applicable", note.applicable},
          {"message", note.message}};
}

TradeoffNote tradeoff_from_json(const json& j) {
  TradeoffNote note;
  for (const auto& [label, v] : j.at("base_rates").items()) note.base_rates.emplace(GroupKey::parse(label), v.get<double>());
  note.base_rates_equal_within = j.at("base_rates_equal_within").get<double>();
  note.conflict_flag = j.at("conflict_flag").get<bool>();
  note.applicable = j.value("applicable", true);
  note.message = j.value("message", "");
  return note;
}

json to_json(const FairnessReport& report) {
  json results = json::array();
  for (const auto& r : report.results) results.push_back(to_json(r));
  json excluded = json::object();
  for (const auto& [key, n] : report.excluded_rows) excluded[key.label()] = n;
  return {{"results", results},
          {"tradeoff", to_json(report.tradeoff)},
          {"attributes", report.attributes},
          {"default_epsilon", report.default_epsilon},
          {"threshold", optional_number(report.threshold)},
          {"undefined_policy", std::string(policy_name(report.undefined_policy))},
          {"excluded_rows", excluded},
          {"timestamp", report.timestamp},
          {"overall_passed", report.overall_passed()}};
}

FairnessReport fairness_report_from_json(const json& j) {
  FairnessReport report;
  for (const auto& r : j.at("results")) report.results.push_back(metric_result_from_json(r));
  report.tradeoff = tradeoff_from_json(j.at("tradeoff"));
  report.attributes = j.at("attributes").get<std::vector<std::string>>();
  report.default_epsilon = j.value("default_epsilon", kDefaultEpsilon);
  report.threshold = j.contains("threshold") ? number_or_null(j.at("threshold")) : std::nullopt;
  report.undefined_policy = parse_policy(j.value("undefined_policy", "strict"));
  if (j.contains("excluded_rows")) {
    for (const auto& [label, n] : j.at("excluded_rows").items()) {
      report.excluded_rows.emplace(GroupKey::parse(label), n.get<std::size_t>());
    }
  }
  report.timestamp = j.value("timestamp", "");
  return report;
}

json to_json(const Criterion& c) { return {{"metric", std::string(to_string(c.metric))}, {"epsilon", c.epsilon}}; }

Criterion criterion_from_json(const json& j) {
  if (j.is_string()) return parse_criterion(j.get<std::string>());
  if (!j.is_object()) throw InputError("criterion must be an object or a \"metric:epsilon\" string");
  Criterion c;
  c.metric = parse_metric(j.at("metric").get<std::string>());
  c.epsilon = j.value("epsilon", kDefaultEpsilon);
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw InputError("epsilon must lie in [0,1]");
  return c;
}

json to_json(const DiagnosticPolicy& p) {
  json cutoff;
  if (const auto* at = std::get_if<CutoffTime>(&p.staleness_cutoff)) {
    cutoff = {{"before", format_timestamp(at->seconds_since_epoch)}};
  } else {
    cutoff = {{"max_age_days", std::get<MaxAge>(p.staleness_cutoff).days}};
  }
  return {{"group_share_floor", p.group_share_floor},
          {"tv_flag_threshold", p.tv_flag_threshold},
          {"min_rows_per_group", p.min_rows_per_group},
          {"rows_per_feature_min", p.rows_per_feature_min},
          {"staleness_cutoff", cutoff},
          {"as_of", p.as_of ? json(format_timestamp(*p.as_of)) : json(nullptr)},
          {"drift_flag_threshold", p.drift_flag_threshold},
          {"missingness_gap_threshold", p.missingness_gap_threshold},
          {"period_shift_threshold", p.period_shift_threshold}};
}

DiagnosticPolicy diagnostic_policy_from_json(const json& j) {
  if (!j.is_object()) throw InputError("diagnostic policy must be a JSON object");
  static const std::set<std::string> known{"group_share_floor",         "tv_flag_threshold",    "min_rows_per_group",
                                           "rows_per_feature_min",      "staleness_cutoff",     "as_of",
                                           "drift_flag_threshold",      "missingness_gap_threshold",
                                           "period_shift_threshold"};
  for (const auto& [key, v] : j.items()) {
    if (!known.count(key)) throw InputError("unknown diagnostic policy key '" + key + "'");
  }
  DiagnosticPolicy p;
  p.group_share_floor = j.value("group_share_floor", p.group_share_floor);
  p.tv_flag_threshold = j.value("tv_flag_threshold", p.tv_flag_threshold);
  p.min_rows_per_group = j.value("min_rows_per_group", p.min_rows_per_group);
  p.rows_per_feature_min = j.value("rows_per_feature_min", p.rows_per_feature_min);
  p.drift_flag_threshold = j.value("drift_flag_threshold", p.drift_flag_threshold);
  p.missingness_gap_threshold = j.value("missingness_gap_threshold", p.missingness_gap_threshold);
  p.period_shift_threshold = j.value("period_shift_threshold", p.period_shift_threshold);
  if (j.contains("as_of") && !j.at("as_of").is_null()) p.as_of = timestamp_from(j.at("as_of"));
  if (j.contains("staleness_cutoff")) {
    const auto& c = j.at("staleness_cutoff");
    if (c.contains("before") == c.contains("max_age_days")) {
      throw InputError("staleness_cutoff needs exactly one of 'before' or 'max_age_days'");
    }
    if (c.contains("before")) {
      p.staleness_cutoff = CutoffTime{timestamp_from(c.at("before"))};
    } else {
      p.staleness_cutoff = MaxAge{c.at("max_age_days").get<double>()};
    }
  }
  p.check();
  return p;
}

json to_json(const DiagnosticResult& r) {
  json flags = json::array();
  for (const auto& f : r.flags) {
    flags.push_back({{"subject", f.subject}, {"severity", std::string(to_string(f.severity))}, {"message", f.message}});
  }
  return {{"check", r.check},
          {"details", r.details},
          {"flags", flags},
          {"passed", r.passed},
          {"policy_used", to_json(r.policy_used)}};
}

DiagnosticResult diagnostic_result_from_json(const json& j) {
  DiagnosticResult r;
  r.check = j.at("check").get<std::string>();
  r.details = j.value("details", json::object());
  for (const auto& f : j.at("flags")) {
    r.flags.push_back({f.at("subject").get<std::string>(), parse_severity(f.at("severity").get<std::string>()),
                       f.at("message").get<std::string>()});
  }
  r.passed = j.at("passed").get<bool>();
  if (j.contains("policy_used")) r.policy_used = diagnostic_policy_from_json(j.at("policy_used"));
  return r;
}

GroupShares group_shares_from_json(const json& j) {
  if (!j.is_object()) throw InputError("reference shares must be a JSON object of group label to share");
  GroupShares shares;
  for (const auto& [label, v] : j.items()) shares.emplace(GroupKey::parse(label), v.get<double>());
  return shares;
}

json to_json(const ThresholdPolicy& p) {
  json thresholds = json::object();
  for (const auto& [key, t] : p.per_group_threshold) thresholds[key.label()] = t;
  json achieved = json::object();
  for (const auto& [metric, r] : p.achieved) achieved[std::string(to_string(metric))] = to_json(r);
  return {{"per_group_threshold", thresholds},
          {"achieved", achieved},
          {"objective", "accuracy"},
          {"objective_value", p.objective_value},
          {"feasible", p.feasible},
          {"grid_step", p.grid_step}};
}

json to_json(const MitigationProvenance& p) {
  auto result = [](const std::optional<MetricResult>& r) { return r ? to_json(*r) : json(nullptr); };
  return {{"technique", p.technique},
          {"parameters", p.parameters},
          {"seed", p.seed ? json(*p.seed) : json(nullptr)},
          {"rows_changed", p.rows_changed},
          {"rows_added", p.rows_added},
          {"rows_removed", p.rows_removed},
          {"criterion", to_json(p.criterion)},
          {"before", result(p.before)},
          {"after", result(p.after)}};
}

json to_json(const BiasEntry& e) {
  json types = json::array();
  for (auto t : e.fairness_types) types.push_back(std::string(to_string(t)));
  return {{"id", e.id},
          {"name", e.name},
          {"category", std::string(to_string(e.category))},
          {"description", e.description},
          {"lifecycle_stages", e.lifecycle_stages},
          {"significant_stages", e.significant_stages},
          {"fairness_types", types},
          {"anchor", e.anchor},
          {"notes", e.notes.empty() ? json(nullptr) : json(e.notes)}};
}

json to_json(const AssessmentRow& row) {
  return {{"stage", row.stage},
          {"bias", row.bias_id},
          {"category", row.category},
          {"risk_mitigation_action", row.risk_mitigation_action}};
}

AssessmentRow assessment_row_from_json(const json& j) {
  AssessmentRow row;
  const auto& stage = j.at("stage");
  row.stage = stage.is_number_integer() ? stage.get<int>() : parse_stage(stage.get<std::string>());
  stage_name(row.stage);
  row.bias_id = j.at("bias").get<std::string>();
  row.category = j.value("category", "");
  row.risk_mitigation_action = j.value("risk_mitigation_action", "");
  return row;
}

}  // namespace fairlens
