#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairlens/audit_frame.hpp"
#include "fairlens/fairness_metrics.hpp"

namespace fairlens {

/// A (group, binary label) cell.
struct CellKey {
  GroupKey group;
  int label = 0;
  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

struct RowWeights {
  std::map<CellKey, double> cell_weights;
  /// Rows with a label and a non-missing group, ascending.
  std::vector<std::size_t> rows;
  /// Parallel to `rows`.
  std::vector<double> row_weights;
};

/// Audit trail attached to every mitigation output.
struct MitigationProvenance {
  std::string technique;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::size_t rows_changed = 0;
  std::size_t rows_added = 0;
  std::size_t rows_removed = 0;
  Criterion criterion;
  /// Absent when the frame lacks what the criterion needs (e.g. no label).
  std::optional<MetricResult> before;
  std::optional<MetricResult> after;
};

struct FrameOutcome {
  AuditFrame frame;
  MitigationProvenance provenance;
};

/// Kamiran-Calders weights w(g,y) = N_g N_y / (N N_gy) over usable rows.
/// With require_all_cells, an empty group x label cell is an error instead of
/// being skipped.
RowWeights reweigh(const AuditFrame& frame, const GroupPartition& partition, bool require_all_cells = false);

/// Positive-label rate per group, optionally weighted (weights indexed by
/// frame row), as a demographic-parity style MetricResult.
MetricResult label_parity(const AuditFrame& frame, const GroupPartition& partition, double epsilon,
                          const std::map<std::size_t, double>& row_weight = {});

/// Provenance for a reweighing run: label parity before and after weighting.
MitigationProvenance reweigh_provenance(const AuditFrame& frame, const GroupPartition& partition,
                                        const RowWeights& weights, double epsilon = kDefaultEpsilon);

enum class ResampleStrategy { oversample, undersample };

std::string_view to_string(ResampleStrategy strategy);

/// Moves every (group, label) cell to round(N_g N_y / N) rows. Oversampling
/// duplicates random rows into deficient cells and trims surplus cells back
/// to target; undersampling only drops rows, scaling all targets down so
/// that no cell needs duplicates. Rows without a label or group are kept.
FrameOutcome resample(const AuditFrame& frame, const GroupPartition& partition, ResampleStrategy strategy,
                      std::uint64_t seed, double epsilon = kDefaultEpsilon);

/// floor((P_adv N_dis - P_dis N_adv) / (N_adv + N_dis)), computed in integers.
std::size_t massage_count(std::size_t positives_adv, std::size_t n_adv, std::size_t positives_dis,
                          std::size_t n_dis);

/// Swaps M labels: the M highest-scored negatives in `disadvantaged` become
/// positive and the M lowest-scored positives in `advantaged` become
/// negative. Equal scores go to the lower row index.
FrameOutcome relabel_massage(const AuditFrame& frame, const GroupPartition& partition, const GroupKey& advantaged,
                             const GroupKey& disadvantaged, double epsilon = kDefaultEpsilon);

struct ThresholdSearchOptions {
  /// demographic_parity, tpr_parity, fpr_parity or equalized_odds.
  std::vector<Criterion> constraints;
  double grid_step = 0.05;
  MetricOptions metric;
};

struct ThresholdPolicy {
  std::map<GroupKey, double> per_group_threshold;
  /// Constraint results at the chosen thresholds on the fitting data.
  std::map<MetricKind, MetricResult> achieved;
  /// Accuracy over rows with a label and a score.
  double objective_value = 0.0;
  bool feasible = true;
  double grid_step = 0.05;
};

/// {0, step, 2 step, ...} with 1 always present.
std::vector<double> threshold_grid(double step);

/// Exhaustive per-group threshold search maximising accuracy subject to the
/// constraints. Ties go to the smaller largest threshold, then to the
/// lexicographically smallest threshold tuple (groups in key order). When
/// nothing is feasible, returns the point with the least total violation.
ThresholdPolicy fit_group_thresholds(const AuditFrame& frame, const GroupPartition& partition,
                                     const ThresholdSearchOptions& options);

inline constexpr std::size_t kMaxThresholdGroups = 4;

/// Predictions from per-group thresholds, with provenance for `criterion`.
FrameOutcome apply_thresholds(const AuditFrame& frame, const GroupPartition& partition,
                              const ThresholdPolicy& policy, const Criterion& criterion);

struct RejectOptionOutcome {
  AuditFrame frame;
  /// Rows whose score fell inside the band.
  std::vector<std::size_t> overridden;
  MitigationProvenance provenance;
};

/// Scores in [0.5 - theta, 0.5 + theta] are overridden (disadvantaged group
/// positive, everyone else negative); other rows predict score >= 0.5.
/// theta = 0 leaves the band empty.
RejectOptionOutcome reject_option_adjust(const AuditFrame& frame, const GroupPartition& partition, double theta,
                                         const GroupKey& disadvantaged, const Criterion& criterion = {});

}  // namespace fairlens
