#include <gtest/gtest.h>

#include "fairlens/error.hpp"
#include "fairlens/serialization.hpp"
#include "report_fixtures.hpp"

using namespace fairlens;

TEST(Serialization, FairnessReportRoundTrip) {
  const auto report = fixtures::sample_report();
  const auto j = to_json(report);
  EXPECT_EQ(to_json(fairness_report_from_json(j)).dump(), j.dump());
  EXPECT_EQ(j.at("results").size(), 3u);
  EXPECT_EQ(j.at("overall_passed").get<bool>(), report.overall_passed());
}

TEST(Serialization, MetricResultShapes) {
  const auto report = fixtures::sample_report();
  const auto dp = to_json(report.results[0]);
  EXPECT_EQ(dp.at("metric"), "demographic_parity");
  EXPECT_TRUE(dp.contains("four_fifths_met"));
  const auto eo = to_json(report.results[1]);
  EXPECT_TRUE(eo.at("per_group").at("A").contains("tpr"));
  EXPECT_EQ(to_json(metric_result_from_json(eo)).dump(), eo.dump());
}

TEST(Serialization, CriterionForms) {
  const auto c = criterion_from_json("tpr_parity:0.02");
  EXPECT_EQ(c.metric, MetricKind::tpr_parity);
  EXPECT_EQ(c.epsilon, 0.02);
  EXPECT_EQ(criterion_from_json(to_json(c)).epsilon, 0.02);
  EXPECT_THROW(criterion_from_json(nlohmann::json(3)), Error);
}

TEST(Serialization, PolicyOverridesAndRoundTrip) {
  const auto p = diagnostic_policy_from_json({{"min_rows_per_group", 50}, {"staleness_cutoff", {{"before", "2020-01-01"}}}});
  EXPECT_EQ(p.min_rows_per_group, 50u);
  EXPECT_EQ(p.group_share_floor, 0.05);
  ASSERT_TRUE(std::holds_alternative<CutoffTime>(p.staleness_cutoff));
  EXPECT_EQ(to_json(diagnostic_policy_from_json(to_json(p))).dump(), to_json(p).dump());
  EXPECT_THROW(diagnostic_policy_from_json({{"min_rows", 3}}), InputError);
}

TEST(Serialization, DiagnosticResultRoundTrip) {
  for (const auto& d : fixtures::sample_factsheet_input().diagnostics) {
    const auto j = to_json(d);
    EXPECT_EQ(to_json(diagnostic_result_from_json(j)).dump(), j.dump());
  }
}

TEST(Serialization, AssessmentRowAcceptsStageName) {
  const auto row = assessment_row_from_json(
      {{"stage", "Project Planning"}, {"bias", "historical_bias"}, {"category", "World Bias"}, {"risk_mitigation_action", "x"}});
  EXPECT_EQ(row.stage, 1);
  EXPECT_EQ(to_json(assessment_row_from_json(to_json(row))).dump(), to_json(row).dump());
}

TEST(Serialization, GroupShares) {
  const auto s = group_shares_from_json({{"A", 0.25}, {"B|x", 0.75}});
  EXPECT_EQ(s.at(GroupKey({"B", "x"})), 0.75);
}

TEST(Serialization, BiasEntryNotesNullWhenEmpty) {
  EXPECT_TRUE(to_json(find_bias("selection_bias")).at("notes").is_null());
  EXPECT_TRUE(to_json(find_bias("historical_bias")).at("notes").is_string());
}
