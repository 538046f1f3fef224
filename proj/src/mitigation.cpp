#include "fairlens/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fairlens/error.hpp"

namespace fairlens {

namespace {

const Column& require_label(const AuditFrame& frame, const char* who) {
  const Column* label = frame.find_role(Role::label);
  if (!label) throw PreconditionError(std::string(who) + " needs a label column");
  return *label;
}

std::optional<int> binary_label(const Column& label, std::size_t row) {
  const auto v = label.number(row);
  if (!v) return std::nullopt;
  if (*v != 0.0 && *v != 1.0) {
    throw PreconditionError("label '" + label.name + "' row " + std::to_string(row) + " is not 0/1");
  }
  return static_cast<int>(*v);
}

/// Usable rows per (group, label) cell, skipping missing labels and the missing group.
std::map<CellKey, std::vector<std::size_t>> cells_of(const AuditFrame& frame, const GroupPartition& partition,
                                                     const char* who) {
  const Column& label = require_label(frame, who);
  std::map<CellKey, std::vector<std::size_t>> cells;
  for (const auto& [key, rows] : partition.groups) {
    if (key.is_missing()) continue;
    for (std::size_t r : rows) {
      if (const auto y = binary_label(label, r)) cells[CellKey{key, *y}].push_back(r);
    }
  }
  return cells;
}

struct Margins {
  std::map<GroupKey, std::size_t> group;
  std::map<int, std::size_t> label;
  std::size_t total = 0;
};

Margins margins_of(const std::map<CellKey, std::vector<std::size_t>>& cells) {
  Margins m;
  for (const auto& [cell, rows] : cells) {
    m.group[cell.group] += rows.size();
    m.label[cell.label] += rows.size();
    m.total += rows.size();
  }
  return m;
}

/// The prediction column of `frame` replaced by `predictions`.
AuditFrame with_predictions(const AuditFrame& frame, const std::vector<std::optional<int>>& predictions) {
  const Column* existing = frame.find_role(Role::prediction);
  Column col;
  col.name = existing ? existing->name : "prediction";
  col.dtype = existing ? existing->dtype : DType::boolean;
  col.role = Role::prediction;
  col.cells.reserve(predictions.size());
  for (const auto& p : predictions) {
    col.cells.push_back(p ? Cell(Value(static_cast<double>(*p))) : Cell());
  }
  return frame.with_column(std::move(col));
}

std::optional<MetricResult> measure_predictions(const AuditFrame& frame, const GroupPartition& partition,
                                                const Criterion& criterion, std::optional<double> threshold) {
  if (!frame.find_role(Role::label) || !is_group_metric(criterion.metric)) return std::nullopt;
  const auto confusions = confusion_by_group(frame, partition, threshold);
  return group_metric(confusions.matrices, criterion.metric, criterion.epsilon);
}

/// Metric on the frame's existing predictions, or on score >= 0.5 without any.
std::optional<MetricResult> measure_baseline(const AuditFrame& frame, const GroupPartition& partition,
                                             const Criterion& criterion) {
  if (frame.find_role(Role::prediction)) return measure_predictions(frame, partition, criterion, std::nullopt);
  return measure_predictions(frame, partition, criterion, 0.5);
}

std::size_t count_changed_predictions(const AuditFrame& before, const AuditFrame& after) {
  const Column* old_pred = before.find_role(Role::prediction);
  const Column& new_pred = *after.find_role(Role::prediction);
  std::size_t changed = 0;
  for (std::size_t r = 0; r < after.row_count(); ++r) {
    if (!old_pred || old_pred->cells[r] != new_pred.cells[r]) ++changed;
  }
  return changed;
}

const Column& require_score(const AuditFrame& frame, const char* who) {
  const Column* score = frame.find_role(Role::score);
  if (!score) throw PreconditionError(std::string(who) + " needs a score column");
  return *score;
}

}  // namespace

std::string_view to_string(ResampleStrategy strategy) {
  return strategy == ResampleStrategy::oversample ? "oversample" : "undersample";
}

RowWeights reweigh(const AuditFrame& frame, const GroupPartition& partition, bool require_all_cells) {
  const auto cells = cells_of(frame, partition, "reweighing");
  const Margins m = margins_of(cells);
  if (m.total == 0) throw PreconditionError("reweighing: no row has both a label and a group");
  if (require_all_cells) {
    for (const auto& [group, ng] : m.group) {
      for (const auto& [y, ny] : m.label) {
        if (!cells.count(CellKey{group, y})) {
          throw PreconditionError("reweighing: cell (" + group.label() + ", " + std::to_string(y) + ") is empty");
        }
      }
    }
  }

  RowWeights out;
  const double n = static_cast<double>(m.total);
  for (const auto& [cell, rows] : cells) {
    const double expected = static_cast<double>(m.group.at(cell.group)) * static_cast<double>(m.label.at(cell.label));
    out.cell_weights.emplace(cell, expected / (n * static_cast<double>(rows.size())));
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  std::sort(out.rows.begin(), out.rows.end());
  const Column& label = require_label(frame, "reweighing");
  out.row_weights.reserve(out.rows.size());
  for (std::size_t r : out.rows) {
    out.row_weights.push_back(out.cell_weights.at(CellKey{partition.group_key_of_row[r], *binary_label(label, r)}));
  }
  return out;
}

MetricResult label_parity(const AuditFrame& frame, const GroupPartition& partition, double epsilon,
                          const std::map<std::size_t, double>& row_weight) {
  const Column& label = require_label(frame, "label parity");
  std::map<GroupKey, std::optional<double>> rates;
  std::map<GroupKey, std::size_t> sizes;
  for (const auto& [key, rows] : partition.groups) {
    if (key.is_missing()) continue;
    double positive = 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r : rows) {
      const auto y = binary_label(label, r);
      if (!y) continue;
      const auto w = row_weight.find(r);
      const double weight = w == row_weight.end() ? 1.0 : w->second;
      total += weight;
      positive += *y * weight;
      ++count;
    }
    rates.emplace(key, count == 0 ? std::nullopt : std::optional<double>(positive / total));
    sizes.emplace(key, count);
  }
  if (rates.empty()) throw PreconditionError("label parity: every row is in the missing group");
  auto result = rate_parity(MetricKind::demographic_parity, rates, epsilon, {}, sizes);
  result.note = "positive-label rate per group";
  return result;
}

MitigationProvenance reweigh_provenance(const AuditFrame& frame, const GroupPartition& partition,
                                        const RowWeights& weights, double epsilon) {
  MitigationProvenance p;
  p.technique = "reweigh";
  p.criterion = {MetricKind::demographic_parity, epsilon};
  p.before = label_parity(frame, partition, epsilon);
  std::map<std::size_t, double> by_row;
  for (std::size_t i = 0; i < weights.rows.size(); ++i) by_row.emplace(weights.rows[i], weights.row_weights[i]);
  p.after = label_parity(frame, partition, epsilon, by_row);
  for (double w : weights.row_weights) p.rows_changed += w != 1.0 ? 1 : 0;
  return p;
}

FrameOutcome resample(const AuditFrame& frame, const GroupPartition& partition, ResampleStrategy strategy,
                      std::uint64_t seed, double epsilon) {
  const auto cells = cells_of(frame, partition, "resampling");
  const Margins m = margins_of(cells);
  if (m.total == 0) throw PreconditionError("resampling: no row has both a label and a group");

  const double n = static_cast<double>(m.total);
  std::map<CellKey, double> expected;
  for (const auto& [group, ng] : m.group) {
    for (const auto& [y, ny] : m.label) {
      const CellKey cell{group, y};
      expected[cell] = static_cast<double>(ng) * static_cast<double>(ny) / n;
      if (!cells.count(cell)) {
        throw PreconditionError("resampling: cell (" + group.label() + ", " + std::to_string(y) +
                                ") is empty; nothing to " +
                                (strategy == ResampleStrategy::oversample ? "duplicate" : "scale against"));
      }
    }
  }
  double scale = 1.0;
  if (strategy == ResampleStrategy::undersample) {
    for (const auto& [cell, e] : expected) scale = std::min(scale, static_cast<double>(cells.at(cell).size()) / e);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  std::vector<bool> usable(frame.row_count(), false);
  std::size_t added = 0;
  std::size_t removed = 0;
  nlohmann::json targets = nlohmann::json::object();
  for (const auto& [cell, rows] : cells) {
    for (std::size_t r : rows) usable[r] = true;
    const auto target = std::min<std::size_t>(static_cast<std::size_t>(std::llround(expected.at(cell) * scale)),
                                              strategy == ResampleStrategy::undersample ? rows.size() : SIZE_MAX);
    targets[cell.group.label()][std::to_string(cell.label)] = target;
    if (target >= rows.size()) {
      keep.insert(keep.end(), rows.begin(), rows.end());
      std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
      for (std::size_t i = rows.size(); i < target; ++i) keep.push_back(rows[pick(rng)]);
      added += target - rows.size();
    } else {
      std::sample(rows.begin(), rows.end(), std::back_inserter(keep), target, rng);
      removed += rows.size() - target;
    }
  }
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    if (!usable[r]) keep.push_back(r);
  }
  std::sort(keep.begin(), keep.end());

  FrameOutcome out{frame.select_rows(keep), {}};
  auto& p = out.provenance;
  p.technique = "resample";
  p.parameters = {{"strategy", std::string(to_string(strategy))}, {"targets", targets}};
  p.seed = seed;
  p.rows_added = added;
  p.rows_removed = removed;
  p.criterion = {MetricKind::demographic_parity, epsilon};
  p.before = label_parity(frame, partition, epsilon);
  p.after = label_parity(out.frame, partition_by_group(out.frame, partition.attributes), epsilon);
  return out;
}

std::size_t massage_count(std::size_t positives_adv, std::size_t n_adv, std::size_t positives_dis,
                          std::size_t n_dis) {
  if (n_adv == 0 || n_dis == 0) throw PreconditionError("massaging: both groups need labelled rows");
  const auto lhs = static_cast<long long>(positives_adv * n_dis);
  const auto rhs = static_cast<long long>(positives_dis * n_adv);
  if (lhs < rhs) {
    throw PreconditionError(
        "massaging: the advantaged group has the lower positive rate; swap the advantaged and disadvantaged groups");
  }
  return static_cast<std::size_t>((lhs - rhs) / static_cast<long long>(n_adv + n_dis));
}

FrameOutcome relabel_massage(const AuditFrame& frame, const GroupPartition& partition, const GroupKey& advantaged,
                             const GroupKey& disadvantaged, double epsilon) {
  const Column& label = require_label(frame, "massaging");
  const Column& score = require_score(frame, "massaging (the ranker)");
  if (advantaged == disadvantaged) throw PreconditionError("massaging: the two groups must differ");
  for (const auto* key : {&advantaged, &disadvantaged}) {
    if (!partition.groups.count(*key)) throw PreconditionError("massaging: no group '" + key->label() + "'");
  }

  struct Side {
    std::size_t n = 0;
    std::size_t positives = 0;
    std::vector<std::pair<double, std::size_t>> candidates;
  };
  // Advantaged candidates are positives ranked by ascending score; disadvantaged
  // candidates are negatives ranked by descending score (negated key).
  auto collect = [&](const GroupKey& key, int flippable, double sign) {
    Side s;
    for (std::size_t r : partition.rows_of(key)) {
      const auto y = binary_label(label, r);
      if (!y) continue;
      ++s.n;
      s.positives += *y;
      if (*y == flippable) {
        if (const auto v = score.number(r)) s.candidates.emplace_back(sign * *v, r);
      }
    }
    std::sort(s.candidates.begin(), s.candidates.end());
    return s;
  };
  const Side adv = collect(advantaged, 1, 1.0);
  const Side dis = collect(disadvantaged, 0, -1.0);
  const std::size_t m = massage_count(adv.positives, adv.n, dis.positives, dis.n);
  if (m > adv.candidates.size() || m > dis.candidates.size()) {
    throw PreconditionError("massaging: M=" + std::to_string(m) + " exceeds the flippable rows with scores");
  }

  Column relabelled = label;
  nlohmann::json promoted = nlohmann::json::array();
  nlohmann::json demoted = nlohmann::json::array();
  for (std::size_t i = 0; i < m; ++i) {
    relabelled.cells[dis.candidates[i].second] = Value(1.0);
    relabelled.cells[adv.candidates[i].second] = Value(0.0);
    promoted.push_back(dis.candidates[i].second);
    demoted.push_back(adv.candidates[i].second);
  }

  FrameOutcome out{frame.with_column(std::move(relabelled)), {}};
  auto& p = out.provenance;
  p.technique = "relabel_massage";
  p.parameters = {{"advantaged", advantaged.label()}, {"disadvantaged", disadvantaged.label()}, {"m", m},
                  {"promoted_rows", promoted}, {"demoted_rows", demoted}};
  p.rows_changed = 2 * m;
  p.criterion = {MetricKind::demographic_parity, epsilon};
  p.before = label_parity(frame, partition, epsilon);
  p.after = label_parity(out.frame, partition, epsilon);
  return out;
}

FrameOutcome apply_thresholds(const AuditFrame& frame, const GroupPartition& partition,
                              const ThresholdPolicy& policy, const Criterion& criterion) {
  const Column& score = require_score(frame, "threshold application");
  std::vector<std::optional<int>> predictions(frame.row_count());
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    const auto t = policy.per_group_threshold.find(partition.group_key_of_row[r]);
    if (t == policy.per_group_threshold.end()) {
      throw PreconditionError("threshold policy has no entry for group '" + partition.group_key_of_row[r].label() + "'");
    }
    if (const auto s = score.number(r)) predictions[r] = *s >= t->second ? 1 : 0;
  }
  FrameOutcome out{with_predictions(frame, predictions), {}};
  auto& p = out.provenance;
  p.technique = "group_thresholds";
  nlohmann::json thresholds = nlohmann::json::object();
  for (const auto& [key, t] : policy.per_group_threshold) thresholds[key.label()] = t;
  p.parameters = {{"thresholds", thresholds}, {"grid_step", policy.grid_step}, {"feasible", policy.feasible}};
  p.criterion = criterion;
  p.before = measure_baseline(frame, partition, criterion);
  p.after = measure_predictions(out.frame, partition, criterion, std::nullopt);
  p.rows_changed = count_changed_predictions(frame, out.frame);
  return out;
}

RejectOptionOutcome reject_option_adjust(const AuditFrame& frame, const GroupPartition& partition, double theta,
                                         const GroupKey& disadvantaged, const Criterion& criterion) {
  const Column& score = require_score(frame, "reject-option classification");
  if (!(theta >= 0.0 && theta < 0.5)) throw PreconditionError("reject option: theta must lie in [0, 0.5)");
  if (!partition.groups.count(disadvantaged)) {
    throw PreconditionError("reject option: no group '" + disadvantaged.label() + "'");
  }

  RejectOptionOutcome out;
  std::vector<std::optional<int>> predictions(frame.row_count());
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    const auto s = score.number(r);
    if (!s) continue;
    if (theta > 0.0 && *s >= 0.5 - theta && *s <= 0.5 + theta) {
      predictions[r] = partition.group_key_of_row[r] == disadvantaged ? 1 : 0;
      out.overridden.push_back(r);
    } else {
      predictions[r] = *s >= 0.5 ? 1 : 0;
    }
  }
  out.frame = with_predictions(frame, predictions);
  auto& p = out.provenance;
  p.technique = "reject_option";
  p.parameters = {{"theta", theta}, {"disadvantaged", disadvantaged.label()}, {"overridden_rows", out.overridden.size()}};
  p.criterion = criterion;
  p.before = measure_baseline(frame, partition, criterion);
  p.after = measure_predictions(out.frame, partition, criterion, std::nullopt);
  p.rows_changed = count_changed_predictions(frame, out.frame);
  return out;
}

}  // namespace fairlens
