#include "fairlens/fairness_metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

constexpr std::array kMetricNames{"demographic_parity", "tpr_parity", "fpr_parity", "equalized_odds",
                                  "ppv_parity", "individual_consistency", "counterfactual_flip"};

std::optional<double> rate(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

double pair_ratio(double a, double b) {
  const double hi = std::max(a, b);
  return hi == 0.0 ? 1.0 : std::min(a, b) / hi;
}

struct Spread {
  double gap = 0.0;
  double ratio = 1.0;
  bool reference_undefined = false;
};

// Gap and ratio over the defined entries of `values`.
Spread spread(const std::map<GroupKey, std::optional<double>>& values, const std::optional<GroupKey>& reference) {
  Spread s;
  std::optional<double> ref_value;
  if (reference) {
    auto it = values.find(*reference);
    if (it == values.end()) throw PreconditionError("reference group '" + reference->label() + "' is not present");
    ref_value = it->second;
    s.reference_undefined = !ref_value.has_value();
  }
  if (ref_value) {
    for (const auto& [key, v] : values) {
      if (!v) continue;
      s.gap = std::max(s.gap, std::abs(*v - *ref_value));
      s.ratio = std::min(s.ratio, pair_ratio(*v, *ref_value));
    }
    return s;
  }
  std::optional<double> lo;
  std::optional<double> hi;
  for (const auto& [key, v] : values) {
    if (!v) continue;
    lo = lo ? std::min(*lo, *v) : *v;
    hi = hi ? std::max(*hi, *v) : *v;
  }
  if (lo) {
    s.gap = *hi - *lo;
    s.ratio = *hi == 0.0 ? 1.0 : *lo / *hi;
  }
  return s;
}

std::optional<double> rate_for(MetricKind metric, const ConfusionMatrix& m) {
  switch (metric) {
    case MetricKind::demographic_parity:
      return m.selection_rate();
    case MetricKind::tpr_parity:
      return m.tpr();
    case MetricKind::fpr_parity:
      return m.fpr();
    case MetricKind::ppv_parity:
      return m.ppv();
    default:
      throw PreconditionError("metric " + std::string(to_string(metric)) + " is not a single-rate group metric");
  }
}

void finish_verdict(MetricResult& result, bool any_defined, bool reference_undefined, const MetricOptions& options) {
  const bool strict_fail = options.undefined_policy == UndefinedPolicy::strict && !result.undefined_groups.empty();
  result.passed = any_defined && !strict_fail && !reference_undefined && result.gap <= result.epsilon;
  if (reference_undefined) result.note = "reference group rate is undefined";
}

bool label_is_positive(const Column& label, std::size_t row, double value) {
  if (value != 0.0 && value != 1.0) {
    throw PreconditionError("column '" + label.name + "' row " + std::to_string(row) + " is not binary (0/1)");
  }
  return value == 1.0;
}

}  // namespace

std::string_view to_string(MetricKind kind) { return kMetricNames[static_cast<std::size_t>(kind)]; }

MetricKind parse_metric(std::string_view text) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (text == kMetricNames[i]) return static_cast<MetricKind>(i);
  }
  throw PreconditionError("unknown metric '" + std::string(text) + "'");
}

bool is_group_metric(MetricKind kind) {
  return kind != MetricKind::individual_consistency && kind != MetricKind::counterfactual_flip;
}

std::optional<double> ConfusionMatrix::tpr() const { return rate(tp, tp + fn); }
std::optional<double> ConfusionMatrix::fpr() const { return rate(fp, fp + tn); }
std::optional<double> ConfusionMatrix::ppv() const { return rate(tp, tp + fp); }
std::optional<double> ConfusionMatrix::selection_rate() const { return rate(tp + fp, total()); }
std::optional<double> ConfusionMatrix::base_rate() const { return rate(tp + fn, total()); }
std::optional<double> ConfusionMatrix::accuracy() const { return rate(tp + tn, total()); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

GroupConfusions confusion_by_group(const AuditFrame& frame, const GroupPartition& partition,
                                   std::optional<double> threshold) {
  const Column* label = frame.find_role(Role::label);
  if (!label) throw PreconditionError("frame has no label column");
  const Column* source = nullptr;
  if (threshold) {
    if (!(*threshold >= 0.0 && *threshold <= 1.0)) throw PreconditionError("threshold must lie in [0,1]");
    source = frame.find_role(Role::score);
    if (!source) throw PreconditionError("a threshold was given but the frame has no score column");
  } else {
    source = frame.find_role(Role::prediction);
    if (!source) throw PreconditionError("frame has no prediction column (give a threshold to use scores)");
  }
  if (partition.group_key_of_row.size() != frame.row_count()) {
    throw PreconditionError("partition was not built from this frame");
  }

  GroupConfusions out;
  for (const auto& [key, rows] : partition.groups) {
    ConfusionMatrix m;
    std::size_t excluded = 0;
    for (std::size_t r : rows) {
      const auto y = label->number(r);
      const auto s = source->number(r);
      if (!y || !s) {
        ++excluded;
        continue;
      }
      const bool actual = label_is_positive(*label, r, *y);
      const bool predicted = threshold ? *s >= *threshold : label_is_positive(*source, r, *s);
      if (actual) {
        predicted ? ++m.tp : ++m.fn;
      } else {
        predicted ? ++m.fp : ++m.tn;
      }
    }
    out.matrices.emplace(key, m);
    out.excluded.emplace(key, excluded);
  }
  return out;
}

MetricResult group_metric(const ConfusionByGroup& confusions, MetricKind metric, double epsilon,
                          const MetricOptions& options) {
  if (confusions.empty()) throw PreconditionError("group_metric needs at least one group");
  if (!is_group_metric(metric)) {
    throw PreconditionError("metric " + std::string(to_string(metric)) + " is not a group metric");
  }

  MetricResult result;
  result.metric = metric;
  result.epsilon = epsilon;
  for (const auto& [key, m] : confusions) {
    if (m.total() < options.min_group_size) result.low_confidence_groups.push_back(key);
  }

  if (metric == MetricKind::equalized_odds) {
    std::map<GroupKey, std::optional<double>> tprs;
    std::map<GroupKey, std::optional<double>> fprs;
    for (const auto& [key, m] : confusions) {
      RatePair pair{m.tpr(), m.fpr()};
      tprs.emplace(key, pair.tpr);
      fprs.emplace(key, pair.fpr);
      if (!pair.tpr || !pair.fpr) result.undefined_groups.push_back(key);
      result.per_group.emplace(key, pair);
    }
    const Spread t = spread(tprs, options.reference_group);
    const Spread f = spread(fprs, options.reference_group);
    result.gap = std::max(t.gap, f.gap);
    result.ratio = std::min(t.ratio, f.ratio);
    const bool any_defined = std::any_of(tprs.begin(), tprs.end(), [](const auto& kv) { return kv.second; }) ||
                             std::any_of(fprs.begin(), fprs.end(), [](const auto& kv) { return kv.second; });
    finish_verdict(result, any_defined, t.reference_undefined || f.reference_undefined, options);
    if (result.note.empty()) result.note = "one tolerance applies to both the TPR and FPR gaps";
    return result;
  }

  std::map<GroupKey, std::optional<double>> values;
  for (const auto& [key, m] : confusions) values.emplace(key, rate_for(metric, m));
  std::map<GroupKey, std::size_t> sizes;
  for (const auto& [key, m] : confusions) sizes.emplace(key, m.total());
  return rate_parity(metric, values, epsilon, options, sizes);
}

MetricResult rate_parity(MetricKind metric, const std::map<GroupKey, std::optional<double>>& rates, double epsilon,
                         const MetricOptions& options, const std::map<GroupKey, std::size_t>& group_sizes) {
  if (rates.empty()) throw PreconditionError("rate_parity needs at least one group");
  MetricResult result;
  result.metric = metric;
  result.epsilon = epsilon;
  bool any_defined = false;
  for (const auto& [key, v] : rates) {
    result.per_group.emplace(key, v);
    if (!v) {
      result.undefined_groups.push_back(key);
    } else {
      any_defined = true;
    }
    auto size = group_sizes.find(key);
    if (size != group_sizes.end() && size->second < options.min_group_size) {
      result.low_confidence_groups.push_back(key);
    }
  }
  const Spread s = spread(rates, options.reference_group);
  result.gap = s.gap;
  result.ratio = s.ratio;
  finish_verdict(result, any_defined, s.reference_undefined, options);
  return result;
}

TradeoffNote tradeoff_diagnostic(const ConfusionByGroup& confusions, double base_rate_tolerance) {
  TradeoffNote note;
  note.base_rates_equal_within = base_rate_tolerance;
  bool imperfect = false;
  for (const auto& [key, m] : confusions) {
    const auto base = m.base_rate();
    if (!base) continue;
    note.base_rates.emplace(key, *base);
    if (*m.accuracy() < 1.0) imperfect = true;
  }
  if (note.base_rates.size() < 2) {
    throw PreconditionError("trade-off diagnostic needs at least two groups with a defined base rate");
  }
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& [key, b] : note.base_rates) {
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  const double gap = hi - lo;
  note.conflict_flag = gap > base_rate_tolerance && imperfect;

  std::ostringstream msg;
  msg << "Base rates differ across groups by " << format_number(gap) << " (tolerance "
      << format_number(base_rate_tolerance) << "). ";
  if (note.conflict_flag) {
    msg << "Because the classifier is imperfect in at least one group, PPV parity and equalized odds cannot both "
           "hold; the project team must choose which criterion to prioritise and record why.";
  } else if (gap > base_rate_tolerance) {
    msg << "The classifier is perfect in every group, so every group metric can hold at once.";
  } else {
    msg << "Base rates are equal within tolerance, so PPV parity and equalized odds are not forced into conflict.";
  }
  note.message = msg.str();
  return note;
}

Criterion parse_criterion(std::string_view text) {
  Criterion c;
  const auto colon = text.find(':');
  c.metric = parse_metric(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    const auto eps_text = text.substr(colon + 1);
    double eps = 0.0;
    auto [ptr, ec] = std::from_chars(eps_text.data(), eps_text.data() + eps_text.size(), eps);
    if (ec != std::errc{} || ptr != eps_text.data() + eps_text.size() || !(eps >= 0.0 && eps <= 1.0)) {
      throw PreconditionError("criterion '" + std::string(text) + "': epsilon must be a number in [0,1]");
    }
    c.epsilon = eps;
  }
  return c;
}

bool FairnessReport::overall_passed() const {
  return std::all_of(results.begin(), results.end(), [](const MetricResult& r) { return r.passed; });
}

FairnessReport evaluate_criteria(const AuditFrame& frame, const GroupPartition& partition,
                                 std::span<const Criterion> criteria, const EvaluationOptions& options) {
  FairnessReport report;
  report.attributes = partition.attributes;
  report.threshold = options.threshold;
  report.undefined_policy = options.metric.undefined_policy;

  const GroupConfusions confusions = confusion_by_group(frame, partition, options.threshold);
  report.excluded_rows = confusions.excluded;

  for (const auto& criterion : criteria) {
    switch (criterion.metric) {
      case MetricKind::individual_consistency:
        report.results.push_back(individual_result(
            criterion.metric, consistency_score(frame, options.consistency_k, options.distance), criterion.epsilon));
        break;
      case MetricKind::counterfactual_flip: {
        if (!options.counterfactual_predictions) {
          throw PreconditionError("counterfactual_flip needs re-scored predictions for the same rows");
        }
        const Column* pred = frame.find_role(Role::prediction);
        if (!pred) throw PreconditionError("counterfactual_flip needs a prediction column");
        std::vector<int> baseline;
        std::vector<int> flipped;
        const auto& cf = *options.counterfactual_predictions;
        if (cf.size() != frame.row_count()) throw PreconditionError("counterfactual predictions length mismatch");
        for (std::size_t r = 0; r < frame.row_count(); ++r) {
          if (const auto v = pred->number(r)) {
            baseline.push_back(static_cast<int>(*v));
            flipped.push_back(cf[r]);
          }
        }
        report.results.push_back(
            individual_result(criterion.metric, counterfactual_flip_rate(baseline, flipped), criterion.epsilon));
        break;
      }
      default:
        report.results.push_back(group_metric(confusions.matrices, criterion.metric, criterion.epsilon, options.metric));
    }
  }

  std::size_t groups_with_base_rate = 0;
  for (const auto& [key, m] : confusions.matrices) {
    if (m.total() > 0) ++groups_with_base_rate;
  }
  if (groups_with_base_rate >= 2) {
    report.tradeoff = tradeoff_diagnostic(confusions.matrices, options.base_rate_tolerance);
  } else {
    report.tradeoff.applicable = false;
    report.tradeoff.base_rates_equal_within = options.base_rate_tolerance;
    for (const auto& [key, m] : confusions.matrices) {
      if (const auto b = m.base_rate()) report.tradeoff.base_rates.emplace(key, *b);
    }
    report.tradeoff.message = "Fewer than two groups have labelled rows; no cross-group trade-off to assess.";
  }
  return report;
}

double counterfactual_flip_rate(std::span<const int> baseline, std::span<const int> flipped) {
  if (baseline.size() != flipped.size()) throw PreconditionError("counterfactual flip test: length mismatch");
  if (baseline.empty()) throw PreconditionError("counterfactual flip test: empty input");
  std::size_t differ = 0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if ((baseline[i] != 0 && baseline[i] != 1) || (flipped[i] != 0 && flipped[i] != 1)) {
      throw PreconditionError("counterfactual flip test: predictions must be 0 or 1");
    }
    if (baseline[i] != flipped[i]) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(baseline.size());
}

MetricResult individual_result(MetricKind metric, double value, double epsilon) {
  if (is_group_metric(metric)) throw PreconditionError("individual_result expects an individual-level metric");
  MetricResult result;
  result.metric = metric;
  result.epsilon = epsilon;
  result.per_group.emplace(GroupKey({"overall"}), std::optional<double>(value));
  if (metric == MetricKind::individual_consistency) {
    result.gap = 1.0 - value;
    result.ratio = value;
    result.note = "k-nearest-neighbour consistency of predictions";
  } else {
    result.gap = value;
    result.ratio = 1.0 - value;
    result.note = "paired flip test over caller re-scored predictions; a proxy for counterfactual fairness";
  }
  result.passed = result.gap <= epsilon;
  return result;
}

}  // namespace fairlens
