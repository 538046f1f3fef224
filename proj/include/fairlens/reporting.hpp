#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairlens/bias_taxonomy.hpp"
#include "fairlens/data_diagnostics.hpp"
#include "fairlens/fairness_metrics.hpp"

namespace fairlens {

enum class DocumentKind { position_statement, bias_plan, data_factsheet };

std::string_view to_string(DocumentKind kind);
DocumentKind parse_document_kind(std::string_view text);

struct Paragraph {
  std::string text;
  bool operator==(const Paragraph&) const = default;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool operator==(const Table&) const = default;
};

struct KeyValue {
  std::string key;
  std::string value;
  /// Dropped from public renders (contact details, file paths).
  bool internal = false;
  bool operator==(const KeyValue&) const = default;
};

struct KeyValues {
  std::vector<KeyValue> items;
  bool operator==(const KeyValues&) const = default;
};

struct JsonPayload {
  nlohmann::json value;
  bool operator==(const JsonPayload&) const = default;
};

struct Block {
  std::variant<Paragraph, Table, KeyValues, JsonPayload> content;
  bool internal = false;
  bool operator==(const Block&) const = default;
};

struct Section {
  std::string heading;
  std::vector<Block> blocks;
  bool internal = false;
  bool operator==(const Section&) const = default;
};

struct Document {
  DocumentKind kind = DocumentKind::position_statement;
  std::string title;
  /// ISO calendar date, YYYY-MM-DD.
  std::string date_completed;
  std::vector<std::string> team_members;
  bool public_release = false;
  std::vector<Section> sections;

  const Section* find_section(std::string_view heading) const;
  bool operator==(const Document&) const = default;
};

/// Throws InputError unless `date` is a valid YYYY-MM-DD calendar date.
void check_iso_date(std::string_view date);

struct DocumentMeta {
  std::string date_completed;
  std::vector<std::string> team_members;
};

struct PositionStatementInput {
  std::string project;
  DocumentMeta meta;
  std::vector<Criterion> established_metrics;
  std::string rationale;
  std::optional<FairnessReport> measured;
};

Document position_statement(const PositionStatementInput& input);

struct BiasPlanInput {
  std::string project;
  DocumentMeta meta;
  std::vector<AssessmentRow> rows;
};

inline constexpr std::array<std::string_view, 4> kBiasPlanColumns{"AI Lifecycle Stage", "Bias", "Category",
                                                                  "Risk Mitigation Action"};

/// Rows are grouped by stage (stable) and checked against the registry.
Document bias_plan(const BiasPlanInput& input);

struct QualitativeField {
  std::string_view key;
  std::string_view heading;
};

/// The seven free-text fields every factsheet must carry, in document order.
inline constexpr std::array<QualitativeField, 7> kFactsheetFields{{
    {"data_representativeness", "Data Representativeness"},
    {"data_sufficiency", "Data Sufficiency"},
    {"source_integrity", "Source Integrity"},
    {"data_timeliness", "Data Timeliness"},
    {"data_relevance", "Data Relevance"},
    {"training_testing_validating_splits", "Training/Testing/Validating Splits"},
    {"unforeseen_data_issues", "Unforeseen Data Issues"},
}};

struct FactsheetInput {
  std::string dataset;
  DocumentMeta meta;
  std::vector<KeyValue> provenance;
  std::vector<DiagnosticResult> diagnostics;
  std::map<std::string, std::string> qualitative;
};

Document data_factsheet(const FactsheetInput& input);

enum class RenderFormat { json, markdown };

RenderFormat parse_render_format(std::string_view text);

/// With public_only, internal sections, blocks and items are left out.
std::string render(const Document& doc, RenderFormat format, bool public_only = false);

Document public_view(const Document& doc);

nlohmann::json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

}  // namespace fairlens
