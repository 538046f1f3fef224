#include <gtest/gtest.h>

#include "fairlens/error.hpp"
#include "fairlens/reporting.hpp"
#include "report_fixtures.hpp"

using namespace fairlens;

namespace {

std::string json_round_trip(const Document& doc) {
  const auto first = render(doc, RenderFormat::json);
  return render(document_from_json(nlohmann::json::parse(first)), RenderFormat::json);
}

const Table& first_table(const Section& s) {
  for (const auto& b : s.blocks) {
    if (const auto* t = std::get_if<Table>(&b.content)) return *t;
  }
  throw std::logic_error("no table in section " + s.heading);
}

}  // namespace

TEST(PositionStatement, RequiredSections) {
  const auto doc = fixtures::sample_position_statement(false);
  EXPECT_EQ(doc.kind, DocumentKind::position_statement);
  EXPECT_TRUE(doc.public_release);
  ASSERT_NE(doc.find_section("Established Fairness Metrics"), nullptr);
  ASSERT_NE(doc.find_section("Explanation of Choice and Rationale"), nullptr);
  EXPECT_EQ(doc.find_section("Measured Results"), nullptr);
  EXPECT_EQ(first_table(*doc.find_section("Established Fairness Metrics")).rows.size(), 2u);
}

TEST(PositionStatement, MeasuredRowsMatchReport) {
  const auto doc = fixtures::sample_position_statement(true);
  const auto* measured = doc.find_section("Measured Results");
  ASSERT_NE(measured, nullptr);
  EXPECT_EQ(first_table(*measured).rows.size(), fixtures::sample_report().results.size());
}

TEST(PositionStatement, RejectsEmptyRationaleAndBadDate) {
  PositionStatementInput in;
  in.project = "p";
  in.meta = fixtures::sample_meta();
  in.established_metrics = {{MetricKind::demographic_parity, 0.1}};
  EXPECT_THROW(position_statement(in), InputError);
  in.rationale = "  ";
  EXPECT_THROW(position_statement(in), InputError);
  in.rationale = "why";
  in.meta.date_completed = "2024-13-01";
  EXPECT_THROW(position_statement(in), InputError);
  in.meta.date_completed = "2024-02-29";
  EXPECT_NO_THROW(position_statement(in));
  in.established_metrics.clear();
  EXPECT_THROW(position_statement(in), InputError);
}

TEST(BiasPlan, MarkdownHeaderAndExemplarRow) {
  const auto md = render(fixtures::sample_bias_plan(), RenderFormat::markdown);
  EXPECT_NE(md.find("| AI Lifecycle Stage | Bias | Category | Risk Mitigation Action |\n| --- | --- | --- | --- |"),
            std::string::npos);
  EXPECT_NE(md.find("| Project Planning | Historical Bias | World Bias | Hold a stakeholder impact workshop before "
                    "scoping. |"),
            std::string::npos);
  EXPECT_EQ(md.rfind("# Bias Self-Assessment and Risk Mitigation Plan", 0), 0u) << md.substr(0, 80);
}

TEST(BiasPlan, RowsGroupedByStage) {
  const auto doc = fixtures::sample_bias_plan();
  const auto& t = first_table(*doc.find_section("Plan"));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][1], "Historical Bias");
  EXPECT_EQ(t.rows[1][1], "Optimism Bias");
  EXPECT_EQ(t.rows[2][0], "Preprocessing & Feature Engineering");
}

TEST(BiasPlan, PendingFooter) {
  const auto md = render(fixtures::sample_bias_plan(), RenderFormat::markdown);
  EXPECT_NE(md.find("1 of 3 actions pending"), std::string::npos);

  BiasPlanInput in{"p", fixtures::sample_meta(), {{1, "historical_bias", "World Bias", "Audit archives."}}};
  EXPECT_NE(render(bias_plan(in), RenderFormat::markdown).find("0 of 1 actions pending"), std::string::npos);
}

TEST(BiasPlan, RejectsStageOutsideScope) {
  BiasPlanInput in{"p", fixtures::sample_meta(), {{6, "representation_bias", "Data Bias", "x"}}};
  EXPECT_THROW(bias_plan(in), InputError);
  in.rows = {{1, "historical_bias", "Data Bias", "x"}};
  EXPECT_THROW(bias_plan(in), InputError);
  in.rows = {{1, "no_such_bias", "World Bias", "x"}};
  EXPECT_THROW(bias_plan(in), InputError);
}

TEST(Factsheet, SevenFieldsAndDiagnostics) {
  const auto doc = fixtures::sample_factsheet();
  for (const auto& f : kFactsheetFields) EXPECT_NE(doc.find_section(f.heading), nullptr) << f.heading;
  EXPECT_NE(doc.find_section("Diagnostic: representativeness"), nullptr);
  EXPECT_NE(doc.find_section("Diagnostic: sufficiency"), nullptr);
  EXPECT_EQ(doc.sections.size(), 1u + 7u + 2u);
}

TEST(Factsheet, MissingFieldNamed) {
  auto in = fixtures::sample_factsheet_input();
  in.qualitative.erase("source_integrity");
  try {
    data_factsheet(in);
    FAIL() << "expected an input error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("source_integrity"), std::string::npos);
  }
}

TEST(Factsheet, EmptyDiagnosticsAllowed) {
  auto in = fixtures::sample_factsheet_input();
  in.diagnostics.clear();
  EXPECT_EQ(data_factsheet(in).sections.size(), 8u);
}

TEST(Factsheet, UnknownFieldRejected) {
  auto in = fixtures::sample_factsheet_input();
  in.qualitative["vibes"] = "good";
  EXPECT_THROW(data_factsheet(in), InputError);
}

TEST(Render, JsonRoundTripIsByteIdentical) {
  for (const auto& doc : {fixtures::sample_position_statement(), fixtures::sample_bias_plan(), fixtures::sample_factsheet()}) {
    EXPECT_EQ(json_round_trip(doc), render(doc, RenderFormat::json)) << to_string(doc.kind);
    EXPECT_EQ(document_from_json(document_to_json(doc)), doc);
  }
}

TEST(Render, MarkdownTitleAndEscaping) {
  const auto doc = fixtures::sample_position_statement();
  const auto md = render(doc, RenderFormat::markdown);
  EXPECT_EQ(md.rfind("# " + doc.title + "\n", 0), 0u);
  EXPECT_NE(md.find("Team members involved: R. Okafor, L. Marsh, J. Wu"), std::string::npos);
  EXPECT_EQ(md.back(), '\n');
  EXPECT_NE(md.substr(md.size() - 2), "\n\n");
}

TEST(Render, PublicModeDropsInternalItems) {
  const auto doc = fixtures::sample_factsheet();
  const auto full = render(doc, RenderFormat::markdown);
  const auto pub = render(doc, RenderFormat::markdown, true);
  EXPECT_NE(full.find("/srv/data/apps.csv"), std::string::npos);
  EXPECT_EQ(pub.find("/srv/data/apps.csv"), std::string::npos);
  EXPECT_NE(pub.find("branch intake system"), std::string::npos);
  EXPECT_EQ(render(public_view(doc), RenderFormat::json), render(doc, RenderFormat::json, true));
}

TEST(Render, ParseFormat) {
  EXPECT_EQ(parse_render_format("md"), RenderFormat::markdown);
  EXPECT_EQ(parse_render_format("json"), RenderFormat::json);
  EXPECT_THROW(parse_render_format("pdf"), InputError);
}

TEST(DocumentJson, RejectsUnknownBlockType) {
  auto j = document_to_json(fixtures::sample_bias_plan());
  j["sections"][0]["blocks"][0]["type"] = "image";
  EXPECT_THROW(document_from_json(j), InputError);
}
