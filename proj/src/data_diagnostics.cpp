#include "fairlens/data_diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

constexpr std::array kSeverityNames{"info", "warning", "error"};

bool has_error(const std::vector<DiagnosticFlag>& flags) {
  return std::any_of(flags.begin(), flags.end(), [](const DiagnosticFlag& f) { return f.severity == Severity::error; });
}

DiagnosticResult start(std::string check, const DiagnosticPolicy& policy) {
  policy.check();
  DiagnosticResult result;
  result.check = std::move(check);
  result.policy_used = policy;
  return result;
}

DiagnosticResult& finish(DiagnosticResult& result) {
  result.passed = !has_error(result.flags);
  return result;
}

std::string pct(double fraction) { return format_number(std::round(fraction * 1e6) / 1e4) + "%"; }

}  // namespace

std::string_view to_string(Severity severity) { return kSeverityNames[static_cast<std::size_t>(severity)]; }

Severity parse_severity(std::string_view text) {
  for (std::size_t i = 0; i < kSeverityNames.size(); ++i) {
    if (text == kSeverityNames[i]) return static_cast<Severity>(i);
  }
  throw InputError("unknown severity '" + std::string(text) + "'");
}

void DiagnosticPolicy::check() const {
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError(std::string("policy: ") + name + " must lie in [0,1]");
  };
  fraction(group_share_floor, "group_share_floor");
  fraction(tv_flag_threshold, "tv_flag_threshold");
  fraction(missingness_gap_threshold, "missingness_gap_threshold");
  fraction(period_shift_threshold, "period_shift_threshold");
  if (min_rows_per_group < 1) throw PreconditionError("policy: min_rows_per_group must be >= 1");
  if (rows_per_feature_min < 1) throw PreconditionError("policy: rows_per_feature_min must be >= 1");
  if (!(drift_flag_threshold >= 0.0) || !std::isfinite(drift_flag_threshold)) {
    throw PreconditionError("policy: drift_flag_threshold must be finite and non-negative");
  }
  if (const auto* age = std::get_if<MaxAge>(&staleness_cutoff); age && !(age->days >= 0.0)) {
    throw PreconditionError("policy: staleness max age must be non-negative");
  }
}

double total_variation(const GroupShares& a, const GroupShares& b) {
  std::set<GroupKey> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double sum = 0.0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    const double va = ia == a.end() ? 0.0 : ia->second;
    const double vb = ib == b.end() ? 0.0 : ib->second;
    sum += std::abs(va - vb);
  }
  return 0.5 * sum;
}

double population_stability_index(std::span<const double> baseline, std::span<const double> recent,
                                  std::size_t bins) {
  if (baseline.empty() || recent.empty()) throw PreconditionError("PSI needs two non-empty samples");
  if (bins < 1) throw PreconditionError("PSI needs at least one bin");
  std::vector<double> sorted(baseline.begin(), baseline.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (std::size_t j = 1; j < bins; ++j) {
    const double e = sorted[j * sorted.size() / bins];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  // Values equal to an edge fall into the bin above it; the lowest edge can
  // coincide with the minimum, leaving bin 0 empty before smoothing.
  const std::size_t nbins = edges.size() + 1;
  auto histogram = [&](std::span<const double> xs) {
    std::vector<double> counts(nbins, 0.0);
    for (double x : xs) counts[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin())] += 1.0;
    return counts;
  };
  const auto old_counts = histogram(baseline);
  const auto new_counts = histogram(recent);
  const double old_total = static_cast<double>(baseline.size() + nbins);
  const double new_total = static_cast<double>(recent.size() + nbins);
  double psi = 0.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    const double p_old = (old_counts[b] + 1.0) / old_total;
    const double p_new = (new_counts[b] + 1.0) / new_total;
    psi += (p_new - p_old) * std::log(p_new / p_old);
  }
  return psi;
}

DiagnosticResult representativeness(const AuditFrame& frame, const GroupPartition& partition,
                                    const std::optional<GroupShares>& reference, const DiagnosticPolicy& policy) {
  auto result = start("representativeness", policy);
  if (partition.groups.empty()) throw PreconditionError("representativeness: partition is empty");
  const double n = static_cast<double>(frame.row_count());

  GroupShares observed;
  for (const auto& [key, rows] : partition.groups) observed.emplace(key, static_cast<double>(rows.size()) / n);
  auto& details = result.details;
  for (const auto& [key, share] : observed) {
    details["observed_shares"][key.label()] = share;
    details["group_counts"][key.label()] = partition.groups.at(key).size();
  }

  if (!reference) {
    details["reference"] = nullptr;
    for (const auto& [key, share] : observed) {
      if (share < policy.group_share_floor) {
        result.flags.push_back({key.label(), Severity::error,
                                "group share " + pct(share) + " is below the floor of " + pct(policy.group_share_floor)});
      }
    }
    return finish(result);
  }

  GroupShares ref = *reference;
  double sum = 0.0;
  for (const auto& [key, share] : ref) {
    if (!observed.count(key)) throw PreconditionError("reference group '" + key.label() + "' is not in the partition");
    if (!(share >= 0.0 && share <= 1.0)) throw PreconditionError("reference shares must lie in [0,1]");
    sum += share;
  }
  for (const auto& [key, share] : observed) {
    if (!ref.count(key)) {
      if (!key.is_missing()) throw PreconditionError("partition group '" + key.label() + "' has no reference share");
      ref.emplace(key, 0.0);
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) throw PreconditionError("reference shares must sum to 1");

  const double tv = total_variation(observed, ref);
  details["total_variation"] = tv;
  for (const auto& [key, share] : ref) details["reference_shares"][key.label()] = share;
  for (const auto& [key, share] : observed) {
    const double deviation = share - ref.at(key);
    details["deviations"][key.label()] = deviation;
    if (std::abs(deviation) > policy.tv_flag_threshold) {
      result.flags.push_back({key.label(), Severity::error,
                              std::string(deviation < 0 ? "underrepresented" : "overrepresented") + ": observed " +
                                  pct(share) + " vs reference " + pct(ref.at(key))});
    }
  }
  return finish(result);
}

DiagnosticResult sufficiency(const AuditFrame& frame, const GroupPartition& partition, const DiagnosticPolicy& policy) {
  auto result = start("sufficiency", policy);
  const auto features = frame.columns_with_role(Role::feature);
  const Column* label = frame.find_role(Role::label);

  std::size_t usable = 0;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    bool ok = !label || !label->is_missing(r);
    for (const Column* f : features) ok = ok && !f->is_missing(r);
    if (ok) ++usable;
  }

  auto& details = result.details;
  for (const auto& [key, rows] : partition.groups) {
    details["group_counts"][key.label()] = rows.size();
    if (rows.size() < policy.min_rows_per_group) {
      result.flags.push_back({key.label(), Severity::error,
                              "group has " + std::to_string(rows.size()) + " rows, below the minimum of " +
                                  std::to_string(policy.min_rows_per_group)});
    }
  }
  const std::size_t required = policy.rows_per_feature_min * features.size();
  details["usable_rows"] = usable;
  details["feature_count"] = features.size();
  details["required_rows"] = required;
  if (usable < required) {
    result.flags.push_back({"features", Severity::error,
                            std::to_string(usable) + " usable rows for " + std::to_string(features.size()) +
                                " features; at least " + std::to_string(required) + " needed (dimensionality)"});
  }
  return finish(result);
}

DiagnosticResult timeliness(const AuditFrame& frame, const DiagnosticPolicy& policy) {
  auto result = start("timeliness", policy);
  const Column* ts = frame.find_role(Role::timestamp);
  if (!ts) throw PreconditionError("timeliness needs a timestamp column");

  std::vector<std::size_t> stamped;
  double newest = -INFINITY;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    if (const auto t = ts->number(r)) {
      stamped.push_back(r);
      newest = std::max(newest, *t);
    }
  }
  auto& details = result.details;
  details["stamped_rows"] = stamped.size();
  if (stamped.empty()) {
    result.flags.push_back({ts->name, Severity::error, "no row carries a timestamp"});
    return finish(result);
  }

  double cutoff = 0.0;
  if (const auto* at = std::get_if<CutoffTime>(&policy.staleness_cutoff)) {
    cutoff = at->seconds_since_epoch;
  } else {
    const double as_of = policy.as_of.value_or(newest);
    cutoff = as_of - std::get<MaxAge>(policy.staleness_cutoff).days * 86400.0;
    details["as_of"] = format_timestamp(as_of);
  }
  std::size_t stale = 0;
  for (std::size_t r : stamped) {
    if (*ts->number(r) < cutoff) ++stale;
  }
  const double staleness = static_cast<double>(stale) / static_cast<double>(stamped.size());
  details["cutoff"] = format_timestamp(cutoff);
  details["staleness"] = staleness;
  if (stale > 0) {
    result.flags.push_back({ts->name, Severity::info, pct(staleness) + " of rows predate the staleness cutoff"});
  }

  details["psi"] = nlohmann::json::object();
  if (stamped.size() < kMinRowsForDrift) {
    result.flags.push_back({ts->name, Severity::info,
                            "drift not computed: fewer than " + std::to_string(kMinRowsForDrift) + " stamped rows"});
    return finish(result);
  }

  for (const auto& col : frame.columns()) {
    if (col.role != Role::feature || col.dtype != DType::numeric) continue;
    std::vector<std::pair<double, double>> points;  // (time, value)
    for (std::size_t r : stamped) {
      if (const auto v = col.number(r)) points.emplace_back(*ts->number(r), *v);
    }
    if (points.size() < kMinRowsForDrift) {
      result.flags.push_back({col.name, Severity::info, "drift not computed: too few complete rows"});
      continue;
    }
    std::sort(points.begin(), points.end());
    const std::size_t half = points.size() / 2;
    std::vector<double> older;
    std::vector<double> newer;
    for (std::size_t i = 0; i < points.size(); ++i) (i < half ? older : newer).push_back(points[i].second);
    const double psi = population_stability_index(older, newer);
    details["psi"][col.name] = psi;
    if (psi > policy.drift_flag_threshold) {
      result.flags.push_back({col.name, Severity::error,
                              "PSI " + format_number(psi) + " between older and newer halves exceeds " +
                                  format_number(policy.drift_flag_threshold)});
    }
  }
  return finish(result);
}

DiagnosticResult missingness_audit(const AuditFrame& frame, const GroupPartition& partition,
                                   const DiagnosticPolicy& policy) {
  auto result = start("missingness", policy);
  if (partition.groups.empty()) throw PreconditionError("missingness audit: partition is empty");
  const std::set<std::string> grouping(partition.attributes.begin(), partition.attributes.end());
  auto& details = result.details;
  details["missing_rates"] = nlohmann::json::object();
  details["gaps"] = nlohmann::json::object();

  for (const auto& col : frame.columns()) {
    if (grouping.count(col.name)) continue;
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& [key, rows] : partition.groups) {
      std::size_t missing = 0;
      for (std::size_t r : rows) missing += col.is_missing(r) ? 1 : 0;
      const double rate = static_cast<double>(missing) / static_cast<double>(rows.size());
      details["missing_rates"][col.name][key.label()] = rate;
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
    }
    const double gap = hi - lo;
    details["gaps"][col.name] = gap;
    if (frame.row_count() > 0 && col.missing_count() == frame.row_count()) {
      result.flags.push_back({col.name, Severity::error, "column is entirely missing and unusable"});
    } else if (gap > policy.missingness_gap_threshold) {
      result.flags.push_back({col.name, Severity::error,
                              "missing rate differs across groups by " + pct(gap) + " (threshold " +
                                  pct(policy.missingness_gap_threshold) + ")"});
    }
  }
  return finish(result);
}

DiagnosticResult chronological_consistency(const AuditFrame& frame, const DiagnosticPolicy& policy) {
  auto result = start("chronological_consistency", policy);
  const Column* period = frame.find_role(Role::period);
  if (!period) throw PreconditionError("chronological consistency needs a period column");
  const Column* label = frame.find_role(Role::label);
  if (!label) throw PreconditionError("chronological consistency needs a label column");

  struct Tally {
    std::size_t rows = 0;
    std::size_t labelled = 0;
    std::size_t positive = 0;
  };
  std::map<std::string, Tally> periods;
  std::size_t unassigned = 0;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    const std::string* p = period->text(r);
    if (!p) {
      ++unassigned;
      continue;
    }
    auto& t = periods[*p];
    ++t.rows;
    if (const auto y = label->number(r)) {
      ++t.labelled;
      if (*y == 1.0) ++t.positive;
    }
  }
  if (periods.empty()) throw PreconditionError("chronological consistency: no row has a period");

  auto& details = result.details;
  details["rows_without_period"] = unassigned;
  std::optional<std::pair<std::string, double>> lo;
  std::optional<std::pair<std::string, double>> hi;
  for (const auto& [name, t] : periods) {
    details["row_counts"][name] = t.rows;
    if (t.labelled == 0) {
      details["positive_rates"][name] = nullptr;
      result.flags.push_back({name, Severity::warning, "period has no labelled rows"});
      continue;
    }
    const double rate = static_cast<double>(t.positive) / static_cast<double>(t.labelled);
    details["positive_rates"][name] = rate;
    if (!lo || rate < lo->second) lo = {name, rate};
    if (!hi || rate > hi->second) hi = {name, rate};
  }
  const double shift = lo ? hi->second - lo->second : 0.0;
  details["shift"] = shift;
  if (periods.size() == 1) {
    result.flags.push_back({periods.begin()->first, Severity::info, "single period; no shift to measure"});
  } else if (shift > policy.period_shift_threshold) {
    result.flags.push_back({lo->first + " vs " + hi->first, Severity::error,
                            "positive-label rate shifts by " + pct(shift) + " across periods (threshold " +
                                pct(policy.period_shift_threshold) + ")"});
  }
  return finish(result);
}

}  // namespace fairlens
