#include <gtest/gtest.h>

#include <cmath>

#include "fairlens/error.hpp"
#include "fairlens/fairness_metrics.hpp"
#include "test_support.hpp"

using namespace fairlens;
using fixtures::binary_column;
using fixtures::number_column;
using fixtures::text_column;

namespace {

struct Labelled {
  std::string group;
  int y;
  int yhat;
};

AuditFrame frame_of(const std::vector<Labelled>& rows) {
  std::vector<std::string> g;
  std::vector<int> y;
  std::vector<int> p;
  for (const auto& r : rows) {
    g.push_back(r.group);
    y.push_back(r.y);
    p.push_back(r.yhat);
  }
  return AuditFrame({text_column("group", Role::protected_attribute, g), binary_column("y", Role::label, y),
                     binary_column("yhat", Role::prediction, p)});
}

GroupPartition by_group(const AuditFrame& f) {
  const std::vector<std::string> attrs{"group"};
  return partition_by_group(f, attrs);
}

/// Selection 6/10 in A and 3/10 in B.
std::vector<Labelled> sixty_thirty() {
  std::vector<Labelled> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"A", i % 2, i < 6 ? 1 : 0});
  for (int i = 0; i < 10; ++i) rows.push_back({"B", i % 2, i < 3 ? 1 : 0});
  return rows;
}

std::vector<Labelled> identical_groups() {
  std::vector<Labelled> rows;
  for (const char* g : {"A", "B", "C"}) {
    for (auto [y, p] : {std::pair{1, 1}, {1, 0}, {0, 0}, {0, 1}, {1, 1}}) rows.push_back({g, y, p});
  }
  return rows;
}

double single(const GroupValue& v) { return *std::get<std::optional<double>>(v); }

}  // namespace

TEST(Confusion, HandEnumeratedExample) {
  const auto f = frame_of({{"A", 1, 1}, {"A", 1, 0}, {"A", 0, 0}, {"A", 0, 1},
                           {"B", 1, 1}, {"B", 1, 1}, {"B", 0, 0}, {"B", 0, 0}});
  const auto c = confusion_by_group(f, by_group(f));
  EXPECT_EQ(c.matrices.at(GroupKey({"A"})), (ConfusionMatrix{1, 1, 1, 1}));
  EXPECT_EQ(c.matrices.at(GroupKey({"B"})), (ConfusionMatrix{2, 0, 2, 0}));
}

TEST(Confusion, PerfectPredictionsHaveNoErrors) {
  const auto f = frame_of({{"A", 1, 1}, {"A", 0, 0}, {"B", 1, 1}, {"B", 0, 0}});
  for (const auto& [key, m] : confusion_by_group(f, by_group(f)).matrices) {
    EXPECT_EQ(m.fp, 0u);
    EXPECT_EQ(m.fn, 0u);
  }
}

TEST(Confusion, ThresholdRule) {
  const AuditFrame f({text_column("group", Role::protected_attribute, std::vector<std::string>{"A", "A"}),
                      binary_column("y", Role::label, {0, 1}), number_column("s", Role::score, {0.2, 0.8})});
  const auto m = confusion_by_group(f, by_group(f), 0.5).matrices.at(GroupKey({"A"}));
  EXPECT_EQ(m, (ConfusionMatrix{1, 0, 1, 0}));
}

TEST(Confusion, MissingLabelRowsAreExcluded) {
  const AuditFrame f({text_column("group", Role::protected_attribute, std::vector<std::string>{"A", "A"}),
                      number_column("y", Role::label, {1.0, std::nullopt}, DType::boolean),
                      binary_column("yhat", Role::prediction, {1, 1})});
  const auto c = confusion_by_group(f, by_group(f));
  EXPECT_EQ(c.matrices.at(GroupKey({"A"})).total(), 1u);
  EXPECT_EQ(c.excluded.at(GroupKey({"A"})), 1u);
}

TEST(GroupMetric, SixtyVersusThirtyDemographicParity) {
  const auto f = frame_of(sixty_thirty());
  const auto r = group_metric(confusion_by_group(f, by_group(f)).matrices, MetricKind::demographic_parity, 0.05);
  EXPECT_NEAR(r.gap, 0.3, 1e-12);
  EXPECT_NEAR(r.ratio, 0.5, 1e-12);
  EXPECT_FALSE(r.passed);
  EXPECT_DOUBLE_EQ(single(r.per_group.at(GroupKey({"A"}))), 0.6);
}

TEST(GroupMetric, IdenticalMatricesPassEverything) {
  const auto f = frame_of(identical_groups());
  const auto c = confusion_by_group(f, by_group(f)).matrices;
  for (auto m : {MetricKind::demographic_parity, MetricKind::tpr_parity, MetricKind::fpr_parity,
                 MetricKind::equalized_odds, MetricKind::ppv_parity}) {
    const auto r = group_metric(c, m, 0.0);
    EXPECT_EQ(r.gap, 0.0) << to_string(m);
    EXPECT_EQ(r.ratio, 1.0) << to_string(m);
    EXPECT_TRUE(r.passed) << to_string(m);
  }
}

TEST(GroupMetric, UndefinedGroupFailsInStrictMode) {
  ConfusionByGroup c{{GroupKey({"A"}), {3, 1, 4, 2}}, {GroupKey({"B"}), {0, 1, 5, 0}}, {GroupKey({"C"}), {3, 0, 2, 3}}};
  const auto strict = group_metric(c, MetricKind::tpr_parity, 1.0);
  EXPECT_EQ(strict.undefined_groups, std::vector<GroupKey>{GroupKey({"B"})});
  EXPECT_FALSE(strict.passed);
  EXPECT_NEAR(strict.gap, 0.6 - 0.5, 1e-12);

  MetricOptions lenient;
  lenient.undefined_policy = UndefinedPolicy::lenient;
  const auto relaxed = group_metric(c, MetricKind::tpr_parity, 0.2, lenient);
  EXPECT_TRUE(relaxed.passed);
  EXPECT_EQ(relaxed.undefined_groups.size(), 1u);
}

TEST(GroupMetric, RatioIsOneWhenAllZero) {
  ConfusionByGroup c{{GroupKey({"A"}), {0, 0, 4, 2}}, {GroupKey({"B"}), {0, 0, 5, 1}}};
  const auto r = group_metric(c, MetricKind::demographic_parity, 0.05);
  EXPECT_EQ(r.gap, 0.0);
  EXPECT_EQ(r.ratio, 1.0);
}

TEST(GroupMetric, ReferenceGroupMode) {
  ConfusionByGroup c{{GroupKey({"A"}), {5, 1, 3, 1}}, {GroupKey({"B"}), {2, 0, 6, 2}}, {GroupKey({"C"}), {4, 0, 6, 0}}};
  MetricOptions opts;
  opts.reference_group = GroupKey({"C"});
  const auto r = group_metric(c, MetricKind::demographic_parity, 0.5, opts);
  // A: 0.6, B: 0.2, reference C: 0.4 -> largest deviation 0.2.
  EXPECT_NEAR(r.gap, 0.2, 1e-12);
}

TEST(GroupMetric, EqualizedOddsTakesWorseOfTprAndFpr) {
  ConfusionByGroup c{{GroupKey({"A"}), {4, 1, 3, 1}}, {GroupKey({"B"}), {1, 2, 2, 3}}};
  const auto tpr = group_metric(c, MetricKind::tpr_parity, 0.05);
  const auto fpr = group_metric(c, MetricKind::fpr_parity, 0.05);
  const auto eo = group_metric(c, MetricKind::equalized_odds, 0.05);
  EXPECT_EQ(eo.gap, std::max(tpr.gap, fpr.gap));
  EXPECT_EQ(eo.ratio, std::min(tpr.ratio, fpr.ratio));
  const auto& pair = std::get<RatePair>(eo.per_group.at(GroupKey({"A"})));
  EXPECT_DOUBLE_EQ(*pair.tpr, 0.8);
  EXPECT_DOUBLE_EQ(*pair.fpr, 0.25);
}

TEST(GroupMetric, LowConfidenceGroupsAreListed) {
  ConfusionByGroup c{{GroupKey({"A"}), {1, 1, 1, 1}}, {GroupKey({"B"}), {10, 0, 10, 0}}};
  const auto r = group_metric(c, MetricKind::demographic_parity, 1.0);
  EXPECT_EQ(r.low_confidence_groups, std::vector<GroupKey>{GroupKey({"A"})});
  EXPECT_TRUE(r.passed);
}

TEST(Evaluate, SixtyThirtyFailsOverall) {
  const auto f = frame_of(sixty_thirty());
  const std::vector<Criterion> criteria{{MetricKind::demographic_parity, 0.05}};
  const auto report = evaluate_criteria(f, by_group(f), criteria);
  ASSERT_EQ(report.results.size(), 1u);
  EXPECT_FALSE(report.results[0].passed);
  EXPECT_FALSE(report.overall_passed());
}

TEST(Evaluate, IdenticalDataPassesAllFive) {
  const auto f = frame_of(identical_groups());
  std::vector<Criterion> criteria;
  for (auto m : {MetricKind::demographic_parity, MetricKind::tpr_parity, MetricKind::fpr_parity,
                 MetricKind::equalized_odds, MetricKind::ppv_parity}) {
    criteria.push_back({m, 0.05});
  }
  const auto report = evaluate_criteria(f, by_group(f), criteria);
  EXPECT_EQ(report.results.size(), 5u);
  EXPECT_TRUE(report.overall_passed());
}

TEST(Evaluate, EmptyCriteriaPassVacuouslyWithTradeoffNote) {
  const auto f = frame_of(sixty_thirty());
  const auto report = evaluate_criteria(f, by_group(f), {});
  EXPECT_TRUE(report.results.empty());
  EXPECT_TRUE(report.overall_passed());
  EXPECT_EQ(report.tradeoff.base_rates.size(), 2u);
  EXPECT_FALSE(report.tradeoff.message.empty());
}

TEST(Criterion, Parsing) {
  const auto c = parse_criterion("equalized_odds:0.1");
  EXPECT_EQ(c.metric, MetricKind::equalized_odds);
  EXPECT_EQ(c.epsilon, 0.1);
  EXPECT_EQ(parse_criterion("ppv_parity").epsilon, kDefaultEpsilon);
  EXPECT_THROW(parse_criterion("nonsense:0.1"), Error);
  EXPECT_THROW(parse_criterion("ppv_parity:1.5"), Error);
}

TEST(Tradeoff, EqualBaseRatesNoConflict) {
  ConfusionByGroup c{{GroupKey({"A"}), {3, 1, 4, 2}}, {GroupKey({"B"}), {3, 1, 4, 2}}};
  EXPECT_FALSE(tradeoff_diagnostic(c, 0.05).conflict_flag);
}

TEST(Tradeoff, UnequalBaseRatesImperfectConflicts) {
  // A: 15 positives of 30; B: 2 positives of 10.
  ConfusionByGroup c{{GroupKey({"A"}), {12, 3, 12, 3}}, {GroupKey({"B"}), {1, 1, 7, 1}}};
  const auto note = tradeoff_diagnostic(c, 0.05);
  EXPECT_TRUE(note.conflict_flag);
  EXPECT_DOUBLE_EQ(note.base_rates.at(GroupKey({"B"})), 0.2);
}

TEST(Tradeoff, PerfectClassifierNoConflict) {
  ConfusionByGroup c{{GroupKey({"A"}), {15, 0, 15, 0}}, {GroupKey({"B"}), {2, 0, 8, 0}}};
  EXPECT_FALSE(tradeoff_diagnostic(c, 0.05).conflict_flag);
}

TEST(Consistency, IdenticalPredictionsScoreOne) {
  const AuditFrame f({number_column("x", Role::feature, {0.0, 1.0, 2.0, 3.0}),
                      binary_column("yhat", Role::prediction, {1, 1, 1, 1})});
  EXPECT_DOUBLE_EQ(consistency_score(f, 2), 1.0);
}

TEST(Consistency, TwinsWithOppositePredictionsScoreZero) {
  const AuditFrame f({number_column("x", Role::feature, {5.0, 5.0}), binary_column("yhat", Role::prediction, {0, 1})});
  EXPECT_DOUBLE_EQ(consistency_score(f, 1), 0.0);
}

TEST(Consistency, DuplicatedRowsSharingPredictionsScoreOne) {
  const AuditFrame f({number_column("x", Role::feature, {0.0, 0.0, 10.0, 10.0}),
                      text_column("c", Role::feature, std::vector<std::string>{"a", "a", "b", "b"}),
                      binary_column("yhat", Role::prediction, {0, 0, 1, 1})});
  EXPECT_DOUBLE_EQ(consistency_score(f, 1), 1.0);
}

TEST(Consistency, KMustLeaveANeighbourPool) {
  const AuditFrame f({number_column("x", Role::feature, {0.0, 1.0}), binary_column("yhat", Role::prediction, {0, 1})});
  EXPECT_THROW(consistency_score(f, 2), PreconditionError);
  EXPECT_THROW(consistency_score(f, 0), PreconditionError);
}

TEST(Consistency, MatchesBruteForceOnRandomFrames) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 12;
    std::vector<std::optional<double>> x(n);
    std::vector<int> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      p[i] = bit(rng);
    }
    const AuditFrame f({number_column("x", Role::feature, x), binary_column("yhat", Role::prediction, p)});
    // One feature: neighbours by |x_i - x_j| with lower index first on ties.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> order;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) order.push_back(j);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return std::abs(*x[a] - *x[i]) < std::abs(*x[b] - *x[i]); });
      const double mean = (p[order[0]] + p[order[1]] + p[order[2]]) / 3.0;
      total += std::abs(p[i] - mean);
    }
    EXPECT_NEAR(consistency_score(f, 3), 1.0 - total / n, 1e-12);
  }
}

TEST(Counterfactual, FlipRates) {
  const std::vector<int> a{0, 1, 0, 1, 1, 0, 0, 1, 1, 0};
  std::vector<int> b = a;
  EXPECT_EQ(counterfactual_flip_rate(a, b), 0.0);
  std::vector<int> complement;
  for (int v : a) complement.push_back(1 - v);
  EXPECT_EQ(counterfactual_flip_rate(a, complement), 1.0);
  b[0] = 1 - b[0];
  b[4] = 1 - b[4];
  b[9] = 1 - b[9];
  EXPECT_DOUBLE_EQ(counterfactual_flip_rate(a, b), 0.3);
  EXPECT_THROW(counterfactual_flip_rate(a, std::vector<int>{1}), PreconditionError);
}
