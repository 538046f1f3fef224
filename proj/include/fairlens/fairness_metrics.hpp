#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairlens/audit_frame.hpp"

namespace fairlens {

enum class MetricKind {
  demographic_parity,
  tpr_parity,
  fpr_parity,
  equalized_odds,
  ppv_parity,
  individual_consistency,
  counterfactual_flip,
};

std::string_view to_string(MetricKind kind);
MetricKind parse_metric(std::string_view text);
/// True for the five metrics computed from per-group confusion matrices.
bool is_group_metric(MetricKind kind);

inline constexpr double kDefaultEpsilon = 0.05;
/// Four-fifths disparate-impact screen. Reported next to the ratio, never
/// used for the verdict.
inline constexpr double kFourFifthsReference = 0.8;

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  // Each rate is nullopt when its denominator is zero.
  std::optional<double> tpr() const;
  std::optional<double> fpr() const;
  std::optional<double> ppv() const;
  std::optional<double> selection_rate() const;
  std::optional<double> base_rate() const;
  std::optional<double> accuracy() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

using ConfusionByGroup = std::map<GroupKey, ConfusionMatrix>;

struct GroupConfusions {
  ConfusionByGroup matrices;
  /// Rows skipped because their label or prediction/score was missing.
  std::map<GroupKey, std::size_t> excluded;
};

/// Per-group confusion matrices. Without a threshold the prediction column is
/// used; with one, a row predicts positive iff its score >= threshold.
GroupConfusions confusion_by_group(const AuditFrame& frame, const GroupPartition& partition,
                                   std::optional<double> threshold = std::nullopt);

enum class UndefinedPolicy {
  strict,   ///< any undefined group rate fails the metric
  lenient,  ///< undefined groups are listed and left out of gap/ratio
};

struct MetricOptions {
  UndefinedPolicy undefined_policy = UndefinedPolicy::strict;
  /// When set, gap and ratio compare every group to this one instead of
  /// taking max - min over all groups.
  std::optional<GroupKey> reference_group;
  /// Groups with fewer rows than this are listed as low confidence.
  std::size_t min_group_size = 10;
};

struct RatePair {
  std::optional<double> tpr;
  std::optional<double> fpr;
  bool operator==(const RatePair&) const = default;
};

/// A single rate, or the (TPR, FPR) pair for equalized odds.
using GroupValue = std::variant<std::optional<double>, RatePair>;

struct MetricResult {
  MetricKind metric = MetricKind::demographic_parity;
  std::map<GroupKey, GroupValue> per_group;
  double gap = 0.0;
  double ratio = 1.0;
  double epsilon = kDefaultEpsilon;
  bool passed = true;
  std::vector<GroupKey> undefined_groups;
  std::vector<GroupKey> low_confidence_groups;
  std::string note;
};

MetricResult group_metric(const ConfusionByGroup& confusions, MetricKind metric, double epsilon,
                          const MetricOptions& options = {});

/// Gap/ratio/verdict over caller-supplied per-group rates. Used for label
/// parity on (possibly weighted) datasets where no confusion matrix exists.
MetricResult rate_parity(MetricKind metric, const std::map<GroupKey, std::optional<double>>& rates, double epsilon,
                         const MetricOptions& options = {},
                         const std::map<GroupKey, std::size_t>& group_sizes = {});

struct TradeoffNote {
  std::map<GroupKey, double> base_rates;
  double base_rates_equal_within = kDefaultEpsilon;
  bool conflict_flag = false;
  /// False when fewer than two groups have a defined base rate.
  bool applicable = true;
  std::string message;
};

TradeoffNote tradeoff_diagnostic(const ConfusionByGroup& confusions, double base_rate_tolerance);

struct Criterion {
  MetricKind metric = MetricKind::demographic_parity;
  double epsilon = kDefaultEpsilon;
};

/// Parses "metric:epsilon" or a bare "metric" (epsilon defaults to 0.05).
Criterion parse_criterion(std::string_view text);

/// Which columns and weights define "similar individuals".
struct DistanceConfig {
  /// Empty selects every feature column.
  std::vector<std::string> features;
  bool include_protected = false;
  /// Per-column weight; absent columns weigh 1.
  std::map<std::string, double> weights;
};

struct EvaluationOptions {
  MetricOptions metric;
  std::optional<double> threshold;
  double base_rate_tolerance = kDefaultEpsilon;
  std::size_t consistency_k = 5;
  DistanceConfig distance;
  /// Re-scored predictions with protected attributes altered, aligned with
  /// the frame's rows. Required for counterfactual_flip criteria.
  std::optional<std::vector<int>> counterfactual_predictions;
};

struct FairnessReport {
  std::vector<MetricResult> results;
  TradeoffNote tradeoff;
  std::vector<std::string> attributes;
  double default_epsilon = kDefaultEpsilon;
  std::optional<double> threshold;
  UndefinedPolicy undefined_policy = UndefinedPolicy::strict;
  std::map<GroupKey, std::size_t> excluded_rows;
  /// Filled by the caller; the library never reads the clock.
  std::string timestamp;

  bool overall_passed() const;
};

FairnessReport evaluate_criteria(const AuditFrame& frame, const GroupPartition& partition,
                                 std::span<const Criterion> criteria, const EvaluationOptions& options = {});

/// 1 - mean_i |pred_i - mean(pred_j over the k nearest neighbours j != i)|.
///
/// Distance is Euclidean over min-max normalised numeric features plus a 0/1
/// mismatch term per categorical feature, each weighted by the config. Rows
/// missing a prediction or any selected feature are skipped. Neighbour ties
/// go to the lower row index.
double consistency_score(const AuditFrame& frame, std::size_t k, const DistanceConfig& distance = {});

/// Fraction of positions where the two prediction vectors disagree.
double counterfactual_flip_rate(std::span<const int> baseline, std::span<const int> flipped);

/// Wraps an individual-level score as a MetricResult under the "overall" key.
/// For consistency the gap is 1 - score; for the flip test it is the rate.
MetricResult individual_result(MetricKind metric, double value, double epsilon);

}  // namespace fairlens
