#include <algorithm>
#include <cmath>

#include "fairlens/error.hpp"
#include "fairlens/mitigation.hpp"

namespace fairlens {

namespace {

bool constraint_metric(MetricKind m) {
  return m == MetricKind::demographic_parity || m == MetricKind::tpr_parity || m == MetricKind::fpr_parity ||
         m == MetricKind::equalized_odds;
}

struct Candidate {
  std::vector<std::size_t> index;
  std::size_t correct = 0;
  std::size_t max_index = 0;
  double excess = 0.0;
};

/// True when `a` beats `b` on (correct desc, max index asc). Lexicographic
/// order is the enumeration order, so equal candidates keep the earlier one.
bool better(const Candidate& a, const Candidate& b) {
  if (a.correct != b.correct) return a.correct > b.correct;
  return a.max_index < b.max_index;
}

}  // namespace

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw PreconditionError("grid step must lie in (0, 0.5]");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    // Snap to 1e-12 so that e.g. 35 * 0.01 compares equal to a score of 0.35.
    const double t = std::round(static_cast<double>(i) * step * 1e12) / 1e12;
    if (t > 1.0 - 1e-9) break;
    grid.push_back(t);
  }
  grid.push_back(1.0);
  return grid;
}

ThresholdPolicy fit_group_thresholds(const AuditFrame& frame, const GroupPartition& partition,
                                     const ThresholdSearchOptions& options) {
  if (!frame.find_role(Role::label)) throw PreconditionError("threshold search needs a label column");
  if (!frame.find_role(Role::score)) throw PreconditionError("threshold search needs a score column");
  std::map<MetricKind, double> constraints;
  for (const auto& c : options.constraints) {
    if (!constraint_metric(c.metric)) {
      throw PreconditionError("threshold search cannot constrain " + std::string(to_string(c.metric)));
    }
    auto [it, fresh] = constraints.emplace(c.metric, c.epsilon);
    if (!fresh) it->second = std::min(it->second, c.epsilon);
  }
  const auto grid = threshold_grid(options.grid_step);
  const std::size_t groups = partition.groups.size();
  if (groups == 0) throw PreconditionError("threshold search: partition is empty");
  if (groups > kMaxThresholdGroups) {
    throw CapabilityError("threshold search supports at most " + std::to_string(kMaxThresholdGroups) + " groups, got " +
                          std::to_string(groups));
  }

  // table[g][i]: confusion matrix of group g at grid point i.
  std::vector<GroupKey> keys;
  std::vector<std::vector<ConfusionMatrix>> table;
  for (const auto& [key, rows] : partition.groups) keys.push_back(key);
  std::size_t usable = 0;
  for (double t : grid) {
    const auto conf = confusion_by_group(frame, partition, t);
    if (table.empty()) {
      table.resize(groups);
      for (const auto& [key, m] : conf.matrices) usable += m.total();
    }
    for (std::size_t g = 0; g < groups; ++g) table[g].push_back(conf.matrices.at(keys[g]));
  }
  if (usable == 0) throw PreconditionError("threshold search: no row has both a label and a score");

  auto evaluate = [&](const std::vector<std::size_t>& index) {
    ConfusionByGroup matrices;
    for (std::size_t g = 0; g < groups; ++g) matrices.emplace(keys[g], table[g][index[g]]);
    std::map<MetricKind, MetricResult> results;
    for (const auto& [metric, eps] : constraints) results.emplace(metric, group_metric(matrices, metric, eps, options.metric));
    return results;
  };
  auto excess_of = [&](const std::map<MetricKind, MetricResult>& results) {
    double excess = 0.0;
    for (const auto& [metric, r] : results) {
      if (r.passed) continue;
      const bool undefined_fail = !r.undefined_groups.empty() && options.metric.undefined_policy == UndefinedPolicy::strict;
      excess += undefined_fail ? 1.0 : std::max(0.0, r.gap - r.epsilon);
    }
    return excess;
  };

  std::optional<Candidate> best;
  std::optional<Candidate> least_bad;
  std::vector<std::size_t> index(groups, 0);
  for (;;) {
    Candidate c{index, 0, 0, 0.0};
    for (std::size_t g = 0; g < groups; ++g) {
      const auto& m = table[g][index[g]];
      c.correct += m.tp + m.tn;
      c.max_index = std::max(c.max_index, index[g]);
    }
    const bool can_win = !best || better(c, *best);
    if (can_win || !best) {
      const auto results = evaluate(index);
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& kv) { return kv.second.passed; });
      if (ok) {
        best = c;
      } else if (!best) {
        c.excess = excess_of(results);
        if (!least_bad || c.excess < least_bad->excess || (c.excess == least_bad->excess && better(c, *least_bad))) {
          least_bad = c;
        }
      }
    }
    // Odometer over grid indices, last group fastest.
    std::size_t g = groups;
    while (g > 0 && ++index[g - 1] == grid.size()) index[--g] = 0;
    if (g == 0) break;
  }

  const Candidate& chosen = best ? *best : *least_bad;
  ThresholdPolicy policy;
  policy.grid_step = options.grid_step;
  policy.feasible = best.has_value();
  for (std::size_t g = 0; g < groups; ++g) policy.per_group_threshold.emplace(keys[g], grid[chosen.index[g]]);
  policy.achieved = evaluate(chosen.index);
  policy.objective_value = static_cast<double>(chosen.correct) / static_cast<double>(usable);
  return policy;
}

}  // namespace fairlens
