#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairlens/audit_frame.hpp"

namespace fairlens {

enum class Severity { info, warning, error };

std::string_view to_string(Severity severity);
Severity parse_severity(std::string_view text);

struct DiagnosticFlag {
  /// The group, feature, column or period the flag is about. Never empty.
  std::string subject;
  Severity severity = Severity::warning;
  std::string message;
};

/// Rows stamped before this instant are stale.
struct CutoffTime {
  double seconds_since_epoch = 0.0;
};
/// Rows older than this many days before the as-of time are stale.
struct MaxAge {
  double days = 365.0;
};
using StalenessCutoff = std::variant<CutoffTime, MaxAge>;

/// Thresholds for the data checks. Every report echoes the policy it used.
struct DiagnosticPolicy {
  double group_share_floor = 0.05;
  double tv_flag_threshold = 0.10;
  std::size_t min_rows_per_group = 30;
  std::size_t rows_per_feature_min = 10;
  StalenessCutoff staleness_cutoff = MaxAge{};
  /// Reference instant for MaxAge; defaults to the newest timestamp in the frame.
  std::optional<double> as_of;
  double drift_flag_threshold = 0.2;
  double missingness_gap_threshold = 0.10;
  double period_shift_threshold = 0.10;

  /// Throws PreconditionError when a fraction leaves [0,1] or a count is 0.
  void check() const;
};

struct DiagnosticResult {
  std::string check;
  nlohmann::json details = nlohmann::json::object();
  std::vector<DiagnosticFlag> flags;
  bool passed = true;
  DiagnosticPolicy policy_used;
};

using GroupShares = std::map<GroupKey, double>;

/// Observed group shares against an optional reference population. With a
/// reference, reports the total-variation distance and flags groups whose
/// share deviates by more than tv_flag_threshold; without one, flags groups
/// below group_share_floor. A reference may omit the missing group (taken as
/// share 0) but must otherwise name exactly the partition's groups.
DiagnosticResult representativeness(const AuditFrame& frame, const GroupPartition& partition,
                                    const std::optional<GroupShares>& reference, const DiagnosticPolicy& policy);

/// Flags groups below min_rows_per_group and a frame with fewer usable rows
/// than rows_per_feature_min per feature.
DiagnosticResult sufficiency(const AuditFrame& frame, const GroupPartition& partition, const DiagnosticPolicy& policy);

/// Staleness plus per-feature drift (PSI) between the older and newer half.
DiagnosticResult timeliness(const AuditFrame& frame, const DiagnosticPolicy& policy);

/// Per-group, per-column missing rates and their spread.
DiagnosticResult missingness_audit(const AuditFrame& frame, const GroupPartition& partition,
                                   const DiagnosticPolicy& policy);

/// Positive-label rate per period and the max - min shift across periods.
DiagnosticResult chronological_consistency(const AuditFrame& frame, const DiagnosticPolicy& policy);

/// Half the L1 distance between two share vectors over the union of keys.
double total_variation(const GroupShares& a, const GroupShares& b);

/// PSI with equal-frequency bins fit on `baseline` and +1 smoothing per bin.
double population_stability_index(std::span<const double> baseline, std::span<const double> recent,
                                  std::size_t bins = 10);

inline constexpr std::size_t kMinRowsForDrift = 20;

}  // namespace fairlens
