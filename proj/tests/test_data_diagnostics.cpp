#include <gtest/gtest.h>

#include <cmath>

#include "fairlens/data_diagnostics.hpp"
#include "fairlens/error.hpp"
#include "test_support.hpp"

using namespace fairlens;
using fixtures::binary_column;
using fixtures::number_column;
using fixtures::text_column;

namespace {

std::vector<std::string> repeat(const std::string& v, std::size_t n) { return std::vector<std::string>(n, v); }

template <class T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

GroupPartition by(const AuditFrame& f, const char* attr = "group") {
  const std::vector<std::string> attrs{attr};
  return partition_by_group(f, attrs);
}

bool flagged(const DiagnosticResult& r, const std::string& subject) {
  return std::any_of(r.flags.begin(), r.flags.end(), [&](const DiagnosticFlag& f) { return f.subject == subject; });
}

AuditFrame groups_frame(std::size_t a, std::size_t b, std::size_t c = 0) {
  auto g = concat(concat(repeat("A", a), repeat("B", b)), repeat("C", c));
  return AuditFrame({text_column("group", Role::protected_attribute, g)});
}

}  // namespace

TEST(TotalVariation, HalfL1) {
  const GroupShares a{{GroupKey({"A"}), 0.8}, {GroupKey({"B"}), 0.2}};
  const GroupShares b{{GroupKey({"A"}), 0.5}, {GroupKey({"B"}), 0.5}};
  EXPECT_NEAR(total_variation(a, b), 0.3, 1e-12);
  EXPECT_EQ(total_variation(a, a), 0.0);
}

TEST(Representativeness, MatchingReferencePasses) {
  const auto f = groups_frame(10, 10);
  const GroupShares ref{{GroupKey({"A"}), 0.5}, {GroupKey({"B"}), 0.5}};
  const auto r = representativeness(f, by(f), ref, {});
  EXPECT_EQ(r.details.at("total_variation").get<double>(), 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(Representativeness, SkewedSampleFlagsUnderrepresentedGroup) {
  const auto f = groups_frame(80, 20);
  const GroupShares ref{{GroupKey({"A"}), 0.5}, {GroupKey({"B"}), 0.5}};
  const auto r = representativeness(f, by(f), ref, {});
  EXPECT_NEAR(r.details.at("total_variation").get<double>(), 0.3, 1e-12);
  EXPECT_TRUE(flagged(r, "B"));
  EXPECT_FALSE(r.passed);
}

TEST(Representativeness, FloorWithoutReference) {
  const auto f = groups_frame(49, 49, 2);
  const auto r = representativeness(f, by(f), std::nullopt, {});
  EXPECT_TRUE(flagged(r, "C"));
  EXPECT_FALSE(flagged(r, "A"));
}

TEST(Representativeness, ReferenceMustCoverGroups) {
  const auto f = groups_frame(5, 5);
  EXPECT_THROW(representativeness(f, by(f), GroupShares{{GroupKey({"A"}), 1.0}}, {}), PreconditionError);
  EXPECT_THROW(representativeness(f, by(f), GroupShares{{GroupKey({"A"}), 0.5}, {GroupKey({"B"}), 0.2}}, {}),
               PreconditionError);
}

TEST(Sufficiency, LargeFramePasses) {
  std::vector<std::optional<double>> x(1000, 1.0);
  auto g = concat(repeat("A", 500), repeat("B", 500));
  std::vector<Column> cols{text_column("group", Role::protected_attribute, g)};
  for (int i = 0; i < 5; ++i) cols.push_back(number_column("f" + std::to_string(i), Role::feature, x));
  const AuditFrame f(cols);
  EXPECT_TRUE(sufficiency(f, by(f), {}).passed);
}

TEST(Sufficiency, SmallGroupFlagged) {
  const auto f = groups_frame(100, 12);
  const auto r = sufficiency(f, by(f), {});
  EXPECT_TRUE(flagged(r, "B"));
  EXPECT_FALSE(flagged(r, "A"));
}

TEST(Sufficiency, DimensionalityFlag) {
  std::vector<std::optional<double>> x(200, 1.0);
  std::vector<Column> cols{text_column("group", Role::protected_attribute, concat(repeat("A", 100), repeat("B", 100)))};
  for (int i = 0; i < 50; ++i) cols.push_back(number_column("f" + std::to_string(i), Role::feature, x));
  const AuditFrame f(cols);
  const auto r = sufficiency(f, by(f), {});
  EXPECT_TRUE(flagged(r, "features"));
  EXPECT_EQ(r.details.at("required_rows").get<std::size_t>(), 500u);
}

namespace {

AuditFrame timed_frame(const std::vector<std::string>& stamps, const std::vector<std::optional<double>>& x) {
  std::vector<std::optional<double>> t;
  for (const auto& s : stamps) t.push_back(parse_timestamp(s));
  return AuditFrame({number_column("when", Role::timestamp, t, DType::timestamp),
                     number_column("x", Role::feature, x)});
}

}  // namespace

TEST(Timeliness, AllRecentIsNotStale) {
  const auto f = timed_frame({"2024-01-01", "2024-02-01", "2024-03-01"}, {1.0, 2.0, 3.0});
  const auto r = timeliness(f, {});
  EXPECT_EQ(r.details.at("staleness").get<double>(), 0.0);
}

TEST(Timeliness, HalfOlderThanCutoff) {
  const auto f = timed_frame({"2019-01-01", "2019-06-01", "2024-01-01", "2024-02-01"}, {1.0, 2.0, 3.0, 4.0});
  const auto r = timeliness(f, {});
  EXPECT_EQ(r.details.at("staleness").get<double>(), 0.5);

  DiagnosticPolicy absolute;
  absolute.staleness_cutoff = CutoffTime{*parse_timestamp("2019-03-01")};
  EXPECT_EQ(timeliness(f, absolute).details.at("staleness").get<double>(), 0.25);
}

TEST(Timeliness, DuplicatedHalvesHaveNoDrift) {
  std::vector<std::string> stamps;
  std::vector<std::optional<double>> x;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(10.0, 3.0);
  std::vector<double> sample;
  for (int i = 0; i < 50; ++i) sample.push_back(normal(rng));
  for (int half = 0; half < 2; ++half) {
    for (int i = 0; i < 50; ++i) {
      stamps.push_back(half == 0 ? "2020-01-01" : "2021-01-01");
      x.push_back(sample[static_cast<std::size_t>(i)]);
    }
  }
  const auto r = timeliness(timed_frame(stamps, x), {});
  EXPECT_LE(std::abs(r.details.at("psi").at("x").get<double>()), 1e-6);
  EXPECT_TRUE(r.passed);
}

TEST(Timeliness, ShiftedSecondHalfDrifts) {
  std::vector<std::string> stamps;
  std::vector<std::optional<double>> x;
  for (int i = 0; i < 40; ++i) {
    stamps.push_back(i < 20 ? "2020-01-01" : "2021-01-01");
    x.push_back(i < 20 ? i : 100.0 + i);
  }
  const auto r = timeliness(timed_frame(stamps, x), {});
  EXPECT_GT(r.details.at("psi").at("x").get<double>(), 0.2);
  EXPECT_TRUE(flagged(r, "x"));
}

TEST(Timeliness, TooFewRowsSkipsDrift) {
  const auto f = timed_frame({"2024-01-01", "2024-02-01"}, {1.0, 2.0});
  const auto r = timeliness(f, {});
  EXPECT_TRUE(r.details.at("psi").empty());
  EXPECT_TRUE(r.passed);
}

TEST(Psi, SmoothedHandComputation) {
  // bins=2 over {1,2,3,4} puts the single edge at 3: old counts {2,2}, new {3,1}.
  const std::vector<double> old_x{1, 2, 3, 4};
  const std::vector<double> new_x{1, 1, 1, 4};
  const double po0 = 3.0 / 6, po1 = 3.0 / 6, pn0 = 4.0 / 6, pn1 = 2.0 / 6;
  const double expected = (pn0 - po0) * std::log(pn0 / po0) + (pn1 - po1) * std::log(pn1 / po1);
  EXPECT_NEAR(population_stability_index(old_x, new_x, 2), expected, 1e-15);
}

TEST(Missingness, NoMissingCells) {
  const AuditFrame f({text_column("group", Role::protected_attribute, concat(repeat("A", 3), repeat("B", 3))),
                      number_column("f", Role::feature, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0})});
  const auto r = missingness_audit(f, by(f), {});
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.details.at("gaps").at("f").get<double>(), 0.0);
}

TEST(Missingness, DifferentialFlag) {
  const std::optional<double> na;
  const AuditFrame f({text_column("group", Role::protected_attribute, concat(repeat("A", 5), repeat("B", 5))),
                      number_column("f", Role::feature, {na, na, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0})});
  const auto r = missingness_audit(f, by(f), {});
  EXPECT_NEAR(r.details.at("missing_rates").at("f").at("A").get<double>(), 0.4, 1e-12);
  EXPECT_NEAR(r.details.at("gaps").at("f").get<double>(), 0.4, 1e-12);
  EXPECT_TRUE(flagged(r, "f"));
}

TEST(Missingness, FullyMissingColumnIsUnusable) {
  const std::optional<double> na;
  const AuditFrame f({text_column("group", Role::protected_attribute, concat(repeat("A", 2), repeat("B", 2))),
                      number_column("f", Role::feature, {na, na, na, na})});
  const auto r = missingness_audit(f, by(f), {});
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].severity, Severity::error);
  EXPECT_EQ(r.details.at("gaps").at("f").get<double>(), 0.0);
  EXPECT_NE(r.flags[0].message.find("unusable"), std::string::npos);
}

namespace {

AuditFrame periods_frame(const std::vector<std::pair<std::string, std::vector<int>>>& periods) {
  std::vector<std::string> p;
  std::vector<int> y;
  for (const auto& [name, labels] : periods) {
    for (int v : labels) {
      p.push_back(name);
      y.push_back(v);
    }
  }
  return AuditFrame({text_column("period", Role::period, p), binary_column("y", Role::label, y)});
}

}  // namespace

TEST(Chronological, ConstantRatePasses) {
  const auto r = chronological_consistency(periods_frame({{"2020", {1, 0}}, {"2021", {0, 1}}}), {});
  EXPECT_EQ(r.details.at("shift").get<double>(), 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(Chronological, ShiftFlagged) {
  const auto r = chronological_consistency(
      periods_frame({{"2020", {1, 0, 0, 0, 0}}, {"2021", {1, 1, 0, 0}}}), {});
  EXPECT_NEAR(r.details.at("shift").get<double>(), 0.3, 1e-12);
  EXPECT_FALSE(r.passed);
}

TEST(Chronological, SinglePeriodIsANote) {
  const auto r = chronological_consistency(periods_frame({{"2020", {1, 0, 1}}}), {});
  EXPECT_TRUE(r.passed);
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].severity, Severity::info);
}

TEST(Policy, RejectsOutOfRangeFractions) {
  DiagnosticPolicy p;
  p.tv_flag_threshold = 1.5;
  EXPECT_THROW(p.check(), PreconditionError);
}
