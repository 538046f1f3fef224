#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairlens/error.hpp"
#include "fairlens/fairness_metrics.hpp"

namespace fairlens {

namespace {

struct FeatureColumn {
  const Column* column;
  double weight;
  bool categorical;
  double lo = 0.0;
  double span = 0.0;
};

std::vector<FeatureColumn> select_features(const AuditFrame& frame, const DistanceConfig& config) {
  std::vector<const Column*> chosen;
  if (config.features.empty()) {
    for (const auto& c : frame.columns()) {
      if (c.role == Role::feature || (config.include_protected && c.role == Role::protected_attribute)) {
        chosen.push_back(&c);
      }
    }
  } else {
    for (const auto& name : config.features) {
      const Column& c = frame.column(name);
      if (c.role != Role::feature && c.role != Role::protected_attribute) {
        throw PreconditionError("column '" + name + "' cannot be used as a similarity feature");
      }
      chosen.push_back(&c);
    }
  }
  std::vector<FeatureColumn> out;
  for (const Column* c : chosen) {
    auto w = config.weights.find(c->name);
    const double weight = w == config.weights.end() ? 1.0 : w->second;
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw PreconditionError("distance weight for '" + c->name + "' must be finite and non-negative");
    }
    out.push_back({c, weight, c->dtype == DType::categorical});
  }
  if (out.empty()) throw PreconditionError("consistency score: no usable features");
  return out;
}

}  // namespace

double consistency_score(const AuditFrame& frame, std::size_t k, const DistanceConfig& distance) {
  if (k == 0) throw PreconditionError("consistency score: k must be positive");
  const Column* pred = frame.find_role(Role::prediction);
  if (!pred) throw PreconditionError("consistency score needs a prediction column");
  auto features = select_features(frame, distance);

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    bool complete = !pred->is_missing(r);
    for (const auto& f : features) complete = complete && !f.column->is_missing(r);
    if (complete) rows.push_back(r);
  }
  if (k >= rows.size()) {
    throw PreconditionError("consistency score: k=" + std::to_string(k) + " needs more than k usable rows, have " +
                            std::to_string(rows.size()));
  }

  for (auto& f : features) {
    if (f.categorical) continue;
    double lo = *f.column->number(rows.front());
    double hi = lo;
    for (std::size_t r : rows) {
      const double v = *f.column->number(r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    f.lo = lo;
    f.span = hi - lo;
  }

  const std::size_t n = rows.size();
  // Normalised numeric coordinates, row-major.
  std::vector<double> coords(n * features.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      const auto& f = features[c];
      if (!f.categorical && f.span > 0.0) coords[i * features.size() + c] = (*f.column->number(rows[i]) - f.lo) / f.span;
    }
  }
  std::vector<double> predictions(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = *pred->number(rows[i]);
    if (p != 0.0 && p != 1.0) throw PreconditionError("consistency score: predictions must be 0 or 1");
    predictions[i] = p;
  }

  auto squared_distance = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t c = 0; c < features.size(); ++c) {
      const auto& f = features[c];
      if (f.categorical) {
        if (*f.column->text(rows[a]) != *f.column->text(rows[b])) d += f.weight;
      } else {
        const double delta = coords[a * features.size() + c] - coords[b * features.size() + c];
        d += f.weight * delta * delta;
      }
    }
    return d;
  };

  double total = 0.0;
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(squared_distance(i, j), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());
    double neighbour_mean = 0.0;
    for (std::size_t m = 0; m < k; ++m) neighbour_mean += predictions[candidates[m].second];
    neighbour_mean /= static_cast<double>(k);
    total += std::abs(predictions[i] - neighbour_mean);
  }
  return 1.0 - total / static_cast<double>(n);
}

}  // namespace fairlens
