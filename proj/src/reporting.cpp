#include "fairlens/reporting.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <sstream>

#include "fairlens/audit_frame.hpp"
#include "fairlens/error.hpp"

namespace fairlens {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kKindNames{"position_statement", "bias_plan", "data_factsheet"};

Block paragraph(std::string text, bool internal = false) { return {Paragraph{std::move(text)}, internal}; }
Block table(Table t) { return {std::move(t), false}; }

void check_meta(const DocumentMeta& meta) {
  if (meta.date_completed.empty()) throw InputError("date_completed is required");
  check_iso_date(meta.date_completed);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "undefined"; }

std::string format_group_value(const GroupValue& v) {
  if (const auto* single = std::get_if<std::optional<double>>(&v)) return format_optional(*single);
  const auto& pair = std::get<RatePair>(v);
  return "TPR " + format_optional(pair.tpr) + ", FPR " + format_optional(pair.fpr);
}

std::string md_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

void render_markdown_block(std::ostringstream& out, const Block& block) {
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Paragraph>) {
          out << b.text << "\n\n";
        } else if constexpr (std::is_same_v<T, Table>) {
          out << '|';
          for (const auto& c : b.columns) out << ' ' << md_cell(c) << " |";
          out << "\n|";
          for (std::size_t i = 0; i < b.columns.size(); ++i) out << " --- |";
          out << '\n';
          for (const auto& row : b.rows) {
            out << '|';
            for (const auto& c : row) out << ' ' << md_cell(c) << " |";
            out << '\n';
          }
          out << '\n';
        } else if constexpr (std::is_same_v<T, KeyValues>) {
          for (const auto& kv : b.items) out << "- **" << kv.key << "**: " << kv.value << '\n';
          out << '\n';
        } else {
          out << "```json\n" << b.value.dump(2) << "\n```\n\n";
        }
      },
      block.content);
}

json block_to_json(const Block& block) {
  json j = std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Paragraph>) {
          return {{"type", "paragraph"}, {"text", b.text}};
        } else if constexpr (std::is_same_v<T, Table>) {
          return {{"type", "table"}, {"columns", b.columns}, {"rows", b.rows}};
        } else if constexpr (std::is_same_v<T, KeyValues>) {
          json items = json::array();
          for (const auto& kv : b.items) items.push_back({{"key", kv.key}, {"value", kv.value}, {"internal", kv.internal}});
          return {{"type", "key_values"}, {"items", items}};
        } else {
          return {{"type", "json"}, {"value", b.value}};
        }
      },
      block.content);
  j["internal"] = block.internal;
  return j;
}

Block block_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  Block block;
  block.internal = j.value("internal", false);
  if (type == "paragraph") {
    block.content = Paragraph{j.at("text").get<std::string>()};
  } else if (type == "table") {
    block.content = Table{j.at("columns").get<std::vector<std::string>>(),
                          j.at("rows").get<std::vector<std::vector<std::string>>>()};
  } else if (type == "key_values") {
    KeyValues kvs;
    for (const auto& item : j.at("items")) {
      kvs.items.push_back(
          {item.at("key").get<std::string>(), item.at("value").get<std::string>(), item.value("internal", false)});
    }
    block.content = std::move(kvs);
  } else if (type == "json") {
    block.content = JsonPayload{j.at("value")};
  } else {
    throw InputError("unknown document block type '" + type + "'");
  }
  return block;
}

}  // namespace

std::string_view to_string(DocumentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

DocumentKind parse_document_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (text == kKindNames[i]) return static_cast<DocumentKind>(i);
  }
  throw InputError("unknown document kind '" + std::string(text) + "'");
}

const Section* Document::find_section(std::string_view heading) const {
  for (const auto& s : sections) {
    if (s.heading == heading) return &s;
  }
  return nullptr;
}

void check_iso_date(std::string_view date) {
  auto bad = [&] { return InputError("date '" + std::string(date) + "' is not a valid YYYY-MM-DD date"); };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = date.data() + pos;
    const auto [end, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc() || end != first + len) throw bad();
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year{field(0, 4)},
                                        std::chrono::month{static_cast<unsigned>(field(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(field(8, 2))}};
  if (!ymd.ok()) throw bad();
}

Document position_statement(const PositionStatementInput& input) {
  check_meta(input.meta);
  if (input.established_metrics.empty()) throw InputError("position statement needs at least one metric");
  if (input.rationale.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InputError("position statement needs a non-empty rationale");
  }
  Document doc;
  doc.kind = DocumentKind::position_statement;
  doc.title = "Fairness Position Statement: " + input.project;
  doc.date_completed = input.meta.date_completed;
  doc.team_members = input.meta.team_members;
  doc.public_release = true;

  Table metrics{{"Metric", "Tolerance (epsilon)"}, {}};
  for (const auto& c : input.established_metrics) {
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw InputError("metric tolerance must lie in [0,1]");
    metrics.rows.push_back({std::string(to_string(c.metric)), format_number(c.epsilon)});
  }
  doc.sections.push_back({"Established Fairness Metrics", {table(std::move(metrics))}, false});
  doc.sections.push_back({"Explanation of Choice and Rationale", {paragraph(input.rationale)}, false});

  if (input.measured) {
    const auto& report = *input.measured;
    Table results{{"Metric", "Gap", "Ratio", "Tolerance", "Result", "Per group"}, {}};
    for (const auto& r : report.results) {
      std::string groups;
      for (const auto& [key, v] : r.per_group) {
        if (!groups.empty()) groups += "; ";
        groups += key.label() + ": " + format_group_value(v);
      }
      results.rows.push_back({std::string(to_string(r.metric)), format_number(r.gap), format_number(r.ratio),
                              format_number(r.epsilon), r.passed ? "pass" : "fail", groups});
    }
    Section measured{"Measured Results", {table(std::move(results))}, false};
    if (!report.timestamp.empty()) measured.blocks.push_back(paragraph("Measured at " + report.timestamp + "."));
    if (report.tradeoff.applicable && report.tradeoff.conflict_flag) measured.blocks.push_back(paragraph(report.tradeoff.message));
    doc.sections.push_back(std::move(measured));
  }
  return doc;
}

Document bias_plan(const BiasPlanInput& input) {
  check_meta(input.meta);
  std::vector<AssessmentRow> rows = input.rows;
  for (auto& row : rows) {
    const BiasEntry& entry = find_bias(row.bias_id);
    stage_name(row.stage);
    if (std::find(entry.lifecycle_stages.begin(), entry.lifecycle_stages.end(), row.stage) ==
        entry.lifecycle_stages.end()) {
      throw InputError("bias '" + row.bias_id + "' does not apply to stage " + std::to_string(row.stage) + " (" +
                       std::string(stage_name(row.stage)) + ")");
    }
    const std::string expected = std::string(to_string(entry.category)) + " Bias";
    if (!row.category.empty() && parse_category(row.category) != entry.category) {
      throw InputError("bias '" + row.bias_id + "' belongs to category " + expected + ", not " + row.category);
    }
    row.category = expected;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.stage < b.stage; });

  Document doc;
  doc.kind = DocumentKind::bias_plan;
  doc.title = "Bias Self-Assessment and Risk Mitigation Plan: " + input.project;
  doc.date_completed = input.meta.date_completed;
  doc.team_members = input.meta.team_members;

  Table t{{kBiasPlanColumns.begin(), kBiasPlanColumns.end()}, {}};
  std::size_t pending = 0;
  for (const auto& row : rows) {
    if (row.risk_mitigation_action.find_first_not_of(" \t\r\n") == std::string::npos) ++pending;
    t.rows.push_back({std::string(stage_name(row.stage)), find_bias(row.bias_id).name, row.category,
                      row.risk_mitigation_action});
  }
  doc.sections.push_back({"Plan",
                          {table(std::move(t)), paragraph(std::to_string(pending) + " of " +
                                                          std::to_string(rows.size()) + " actions pending")},
                          false});
  return doc;
}

Document data_factsheet(const FactsheetInput& input) {
  check_meta(input.meta);
  for (const auto& field : kFactsheetFields) {
    const auto it = input.qualitative.find(std::string(field.key));
    if (it == input.qualitative.end() || it->second.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw InputError("factsheet is missing the required field '" + std::string(field.key) + "' (" +
                       std::string(field.heading) + ")");
    }
  }
  for (const auto& [key, text] : input.qualitative) {
    const bool known = std::any_of(kFactsheetFields.begin(), kFactsheetFields.end(),
                                   [&](const QualitativeField& f) { return f.key == key; });
    if (!known) throw InputError("factsheet has an unknown qualitative field '" + key + "'");
  }

  Document doc;
  doc.kind = DocumentKind::data_factsheet;
  doc.title = "Data Factsheet: " + input.dataset;
  doc.date_completed = input.meta.date_completed;
  doc.team_members = input.meta.team_members;

  doc.sections.push_back({"Provenance", {Block{KeyValues{input.provenance}, false}}, false});
  for (const auto& field : kFactsheetFields) {
    doc.sections.push_back({std::string(field.heading), {paragraph(input.qualitative.at(std::string(field.key)))}, false});
  }
  for (const auto& d : input.diagnostics) {
    Table flags{{"Subject", "Severity", "Message"}, {}};
    for (const auto& f : d.flags) flags.rows.push_back({f.subject, std::string(to_string(f.severity)), f.message});
    Section s{"Diagnostic: " + d.check, {}, false};
    s.blocks.push_back(paragraph(d.passed ? "Result: pass" : "Result: fail"));
    s.blocks.push_back(table(std::move(flags)));
    s.blocks.push_back({JsonPayload{d.details}, false});
    doc.sections.push_back(std::move(s));
  }
  return doc;
}

RenderFormat parse_render_format(std::string_view text) {
  if (text == "json") return RenderFormat::json;
  if (text == "md" || text == "markdown") return RenderFormat::markdown;
  throw InputError("unknown format '" + std::string(text) + "' (expected json or md)");
}

Document public_view(const Document& doc) {
  Document out = doc;
  out.sections.clear();
  for (const auto& s : doc.sections) {
    if (s.internal) continue;
    Section copy{s.heading, {}, false};
    for (const auto& b : s.blocks) {
      if (b.internal) continue;
      Block kept = b;
      if (auto* kvs = std::get_if<KeyValues>(&kept.content)) {
        std::erase_if(kvs->items, [](const KeyValue& kv) { return kv.internal; });
      }
      copy.blocks.push_back(std::move(kept));
    }
    out.sections.push_back(std::move(copy));
  }
  return out;
}

std::string render(const Document& doc, RenderFormat format, bool public_only) {
  if (public_only) return render(public_view(doc), format, false);
  const Document& d = doc;
  if (format == RenderFormat::json) return document_to_json(d).dump(2) + "\n";

  std::ostringstream out;
  out << "# " << d.title << "\n\n";
  out << "Date completed: " << d.date_completed << "\n\n";
  out << "Team members involved: ";
  for (std::size_t i = 0; i < d.team_members.size(); ++i) out << (i ? ", " : "") << d.team_members[i];
  out << "\n\n";
  for (const auto& s : d.sections) {
    out << "## " << s.heading << "\n\n";
    for (const auto& b : s.blocks) render_markdown_block(out, b);
  }
  std::string text = out.str();
  while (text.size() >= 2 && text.ends_with("\n\n")) text.pop_back();
  return text;
}

json document_to_json(const Document& doc) {
  json sections = json::array();
  for (const auto& s : doc.sections) {
    json blocks = json::array();
    for (const auto& b : s.blocks) blocks.push_back(block_to_json(b));
    sections.push_back({{"heading", s.heading}, {"internal", s.internal}, {"blocks", blocks}});
  }
  return {{"kind", std::string(to_string(doc.kind))},
          {"title", doc.title},
          {"date_completed", doc.date_completed},
          {"team_members", doc.team_members},
          {"public_release", doc.public_release},
          {"sections", sections}};
}

Document document_from_json(const json& j) {
  Document doc;
  doc.kind = parse_document_kind(j.at("kind").get<std::string>());
  doc.title = j.at("title").get<std::string>();
  doc.date_completed = j.at("date_completed").get<std::string>();
  check_iso_date(doc.date_completed);
  doc.team_members = j.at("team_members").get<std::vector<std::string>>();
  doc.public_release = j.value("public_release", false);
  for (const auto& s : j.at("sections")) {
    Section section{s.at("heading").get<std::string>(), {}, s.value("internal", false)};
    for (const auto& b : s.at("blocks")) section.blocks.push_back(block_from_json(b));
    doc.sections.push_back(std::move(section));
  }
  return doc;
}

}  // namespace fairlens
