#include "fairlens/audit_frame.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairlens/csv.hpp"
#include "fairlens/error.hpp"

namespace fairlens {

namespace {

constexpr std::array kDTypeNames{"categorical", "numeric", "boolean", "timestamp"};
constexpr std::array kRoleNames{"feature", "protected", "label",  "prediction",
                                "score",   "timestamp", "period", "weight"};

bool singleton_role(Role role) { return role != Role::feature && role != Role::protected_attribute; }

void check_compatible(const std::string& name, DType dtype, Role role) {
  auto fail = [&](std::string_view need) {
    throw InputError("column '" + name + "': role " + std::string(to_string(role)) + " requires " +
                     std::string(need) + " dtype, got " + std::string(to_string(dtype)));
  };
  switch (role) {
    case Role::label:
    case Role::prediction:
      if (dtype != DType::boolean && dtype != DType::numeric) fail("boolean or numeric");
      break;
    case Role::score:
    case Role::weight:
      if (dtype != DType::numeric) fail("numeric");
      break;
    case Role::timestamp:
      if (dtype != DType::timestamp) fail("timestamp");
      break;
    case Role::period:
    case Role::protected_attribute:
      if (dtype != DType::categorical) fail("categorical");
      break;
    case Role::feature:
      break;
  }
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<double> parse_boolean(std::string_view text) {
  if (text == "1" || text == "true" || text == "True" || text == "TRUE") return 1.0;
  if (text == "0" || text == "false" || text == "False" || text == "FALSE") return 0.0;
  return std::nullopt;
}

bool parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{} && ptr == text.data() + pos + len;
}

}  // namespace

std::string_view to_string(DType dtype) { return kDTypeNames[static_cast<std::size_t>(dtype)]; }
std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

DType parse_dtype(std::string_view text) {
  for (std::size_t i = 0; i < kDTypeNames.size(); ++i) {
    if (text == kDTypeNames[i]) return static_cast<DType>(i);
  }
  throw InputError("unknown dtype '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (text == kRoleNames[i]) return static_cast<Role>(i);
  }
  throw InputError("unknown role '" + std::string(text) + "'");
}

std::optional<double> Column::number(std::size_t row) const {
  const auto& cell = cells[row];
  if (!cell) return std::nullopt;
  if (const double* v = std::get_if<double>(&*cell)) return *v;
  throw PreconditionError("column '" + name + "' is categorical, not numeric");
}

const std::string* Column::text(std::size_t row) const {
  const auto& cell = cells[row];
  if (!cell) return nullptr;
  if (const std::string* s = std::get_if<std::string>(&*cell)) return s;
  throw PreconditionError("column '" + name + "' is not categorical");
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::nullopt));
}

AuditFrame::AuditFrame(std::vector<Column> columns) : columns_(std::move(columns)) {
  row_count_ = columns_.empty() ? 0 : columns_.front().cells.size();
  std::set<std::string_view> names;
  std::set<Role> singletons;
  for (const auto& col : columns_) {
    if (col.name.empty()) throw InputError("column names must be non-empty");
    if (!names.insert(col.name).second) throw InputError("duplicate column name '" + col.name + "'");
    if (col.cells.size() != row_count_) {
      throw InputError("column '" + col.name + "' has " + std::to_string(col.cells.size()) + " cells, expected " +
                       std::to_string(row_count_));
    }
    if (singleton_role(col.role) && !singletons.insert(col.role).second) {
      throw InputError("more than one column with role " + std::string(to_string(col.role)));
    }
    check_compatible(col.name, col.dtype, col.role);
    const bool want_text = col.dtype == DType::categorical;
    for (const auto& cell : col.cells) {
      if (cell && std::holds_alternative<std::string>(*cell) != want_text) {
        throw InputError("column '" + col.name + "' holds a cell that does not match its dtype");
      }
    }
  }
}

const Column* AuditFrame::find(std::string_view name) const {
  auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
  return it == columns_.end() ? nullptr : &*it;
}

const Column& AuditFrame::column(std::string_view name) const {
  if (const Column* c = find(name)) return *c;
  throw PreconditionError("unknown column '" + std::string(name) + "'");
}

const Column* AuditFrame::find_role(Role role) const {
  auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.role == role; });
  return it == columns_.end() ? nullptr : &*it;
}

std::vector<const Column*> AuditFrame::columns_with_role(Role role) const {
  std::vector<const Column*> out;
  for (const auto& c : columns_) {
    if (c.role == role) out.push_back(&c);
  }
  return out;
}

AuditFrame AuditFrame::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> out;
  out.reserve(columns_.size());
  for (const auto& col : columns_) {
    Column c{col.name, col.dtype, col.role, {}};
    c.cells.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= row_count_) throw PreconditionError("row index out of range");
      c.cells.push_back(col.cells[r]);
    }
    out.push_back(std::move(c));
  }
  return AuditFrame(std::move(out));
}

AuditFrame AuditFrame::with_column(Column column) const {
  std::vector<Column> out = columns_;
  auto it = std::find_if(out.begin(), out.end(), [&](const Column& c) { return c.name == column.name; });
  if (it != out.end()) {
    *it = std::move(column);
  } else {
    out.push_back(std::move(column));
  }
  return AuditFrame(std::move(out));
}

const ColumnSpec* SchemaSpec::find(std::string_view name) const {
  auto it = std::find_if(columns.begin(), columns.end(), [&](const ColumnSpec& c) { return c.name == name; });
  return it == columns.end() ? nullptr : &*it;
}

SchemaSpec parse_schema(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array()) {
    throw InputError("schema: expected an object with a 'columns' array");
  }
  SchemaSpec schema;
  if (j.contains("missing_token")) {
    if (!j["missing_token"].is_string()) throw InputError("schema: missing_token must be a string");
    schema.missing_token = j["missing_token"].get<std::string>();
  }
  std::set<std::string> seen;
  for (const auto& c : j["columns"]) {
    if (!c.is_object() || !c.contains("name") || !c.contains("dtype") || !c.contains("role") ||
        !c["name"].is_string() || !c["dtype"].is_string() || !c["role"].is_string()) {
      throw InputError("schema: every column needs string fields name, dtype, role");
    }
    ColumnSpec spec{c["name"].get<std::string>(), parse_dtype(c["dtype"].get<std::string>()),
                    parse_role(c["role"].get<std::string>())};
    if (!seen.insert(spec.name).second) throw InputError("schema: duplicate column name '" + spec.name + "'");
    check_compatible(spec.name, spec.dtype, spec.role);
    schema.columns.push_back(std::move(spec));
  }
  return schema;
}

SchemaSpec load_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open schema file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

AuditFrame read_csv(std::istream& in, const SchemaSpec& schema) {
  auto records = csv::parse(in);
  if (records.empty()) throw InputError("csv: missing header row");
  const auto& header = records.front();

  std::set<std::string_view> header_names;
  for (const auto& name : header) {
    if (!header_names.insert(name).second) throw InputError("csv: duplicate column name '" + name + "'");
  }
  if (header.size() != schema.columns.size()) {
    throw InputError("csv: header has " + std::to_string(header.size()) + " columns but schema declares " +
                     std::to_string(schema.columns.size()));
  }

  std::vector<Column> columns;
  columns.reserve(header.size());
  for (const auto& name : header) {
    const ColumnSpec* spec = schema.find(name);
    if (!spec) throw InputError("csv: header column '" + name + "' is not in the schema");
    columns.push_back(Column{spec->name, spec->dtype, spec->role, {}});
    columns.back().cells.reserve(records.size() - 1);
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r - 1;
    if (rec.size() != header.size()) {
      throw InputError("csv: row " + std::to_string(row) + " has " + std::to_string(rec.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) {
      Column& col = columns[c];
      const std::string& raw = rec[c];
      if (raw == schema.missing_token) {
        col.cells.emplace_back(std::nullopt);
        continue;
      }
      std::optional<double> parsed;
      switch (col.dtype) {
        case DType::categorical:
          col.cells.emplace_back(Value{raw});
          continue;
        case DType::numeric:
          parsed = parse_double(raw);
          break;
        case DType::boolean:
          parsed = parse_boolean(raw);
          break;
        case DType::timestamp:
          parsed = parse_timestamp(raw);
          break;
      }
      if (!parsed) {
        throw InputError("csv: cannot parse '" + raw + "' as " + std::string(to_string(col.dtype)) + " in column '" +
                         col.name + "', row " + std::to_string(row));
      }
      col.cells.emplace_back(Value{*parsed});
    }
  }
  return AuditFrame(std::move(columns));
}

AuditFrame load_csv(const std::filesystem::path& path, const SchemaSpec& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file " + path.string());
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const AuditFrame& frame, std::string_view missing_token) {
  std::vector<std::string> fields;
  for (const auto& c : frame.columns()) fields.push_back(c.name);
  csv::write_record(out, fields);
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    fields.clear();
    for (const auto& c : frame.columns()) {
      const auto& cell = c.cells[r];
      if (!cell) {
        fields.emplace_back(missing_token);
      } else if (const auto* s = std::get_if<std::string>(&*cell)) {
        fields.push_back(*s);
      } else if (c.dtype == DType::timestamp) {
        fields.push_back(format_timestamp(std::get<double>(*cell)));
      } else {
        fields.push_back(format_number(std::get<double>(*cell)));
      }
    }
    csv::write_record(out, fields);
  }
}

std::string format_number(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::optional<double> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!parse_fixed_int(text, 0, 4, y) || !parse_fixed_int(text, 5, 2, mo) || !parse_fixed_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  if (text.size() != 10) {
    if (text.size() != 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
      return std::nullopt;
    }
    if (!parse_fixed_int(text, 11, 2, h) || !parse_fixed_int(text, 14, 2, mi) || !parse_fixed_int(text, 17, 2, s)) {
      return std::nullopt;
    }
    if (h > 23 || mi > 59 || s > 59) return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
}

std::string format_timestamp(double seconds_since_epoch) {
  using namespace std::chrono;
  const auto total = static_cast<long long>(std::floor(seconds_since_epoch));
  const auto days_count = static_cast<long long>(std::floor(static_cast<double>(total) / 86400.0));
  long long rem = total - days_count * 86400;
  const year_month_day ymd{sys_days{days{days_count}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600, (rem % 3600) / 60,
                rem % 60);
  return buf;
}

ValidationReport validate(const AuditFrame& frame) {
  ValidationReport report;
  if (frame.columns_with_role(Role::protected_attribute).empty()) {
    report.warnings.push_back({"", std::nullopt, "no protected column; group metrics and diagnostics need one"});
  }
  for (const auto& col : frame.columns()) {
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
      const auto& cell = col.cells[r];
      if (!cell || col.dtype == DType::categorical) continue;
      const double v = std::get<double>(*cell);
      switch (col.role) {
        case Role::label:
        case Role::prediction:
          if (v != 0.0 && v != 1.0) {
            report.errors.push_back({col.name, r, "value " + format_number(v) + " is not binary (0/1)"});
          }
          break;
        case Role::score:
          if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            report.errors.push_back({col.name, r, "score " + format_number(v) + " is outside [0,1]"});
          }
          break;
        case Role::weight:
          if (!std::isfinite(v) || v <= 0.0) {
            report.errors.push_back({col.name, r, "weight " + format_number(v) + " is not finite and positive"});
          }
          break;
        default:
          break;
      }
    }
    if (frame.row_count() > 0 && 2 * col.missing_count() > frame.row_count()) {
      const double fraction = static_cast<double>(col.missing_count()) / static_cast<double>(frame.row_count());
      report.warnings.push_back({col.name, std::nullopt, "column is " + format_number(fraction) + " missing"});
    }
  }
  return report;
}

GroupKey GroupKey::missing() {
  GroupKey key;
  key.missing_ = true;
  return key;
}

GroupKey GroupKey::parse(std::string_view label) {
  if (label == kMissingGroupLabel) return missing();
  std::vector<std::string> values;
  std::size_t start = 0;
  while (true) {
    const auto bar = label.find('|', start);
    values.emplace_back(label.substr(start, bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return GroupKey(std::move(values));
}

std::string GroupKey::label() const {
  if (missing_) return std::string(kMissingGroupLabel);
  std::string out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) out += '|';
    out += values_[i];
  }
  return out;
}

std::strong_ordering GroupKey::operator<=>(const GroupKey& other) const {
  if (missing_ != other.missing_) return missing_ ? std::strong_ordering::greater : std::strong_ordering::less;
  return values_ <=> other.values_;
}

const std::vector<std::size_t>& GroupPartition::rows_of(const GroupKey& key) const {
  auto it = groups.find(key);
  if (it == groups.end()) throw PreconditionError("unknown group '" + key.label() + "'");
  return it->second;
}

GroupPartition partition_by_group(const AuditFrame& frame, std::span<const std::string> attributes) {
  if (attributes.empty()) throw PreconditionError("partition needs at least one protected attribute");
  std::vector<const Column*> cols;
  for (const auto& name : attributes) {
    const Column* c = frame.find(name);
    if (!c) throw PreconditionError("unknown column '" + name + "'");
    if (c->role != Role::protected_attribute || c->dtype != DType::categorical) {
      throw PreconditionError("column '" + name + "' is not a categorical protected attribute");
    }
    cols.push_back(c);
  }

  GroupPartition partition;
  partition.attributes.assign(attributes.begin(), attributes.end());
  partition.group_key_of_row.reserve(frame.row_count());
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    std::vector<std::string> values;
    bool any_missing = false;
    for (const Column* c : cols) {
      const std::string* v = c->text(r);
      if (!v) {
        any_missing = true;
        break;
      }
      values.push_back(*v);
    }
    GroupKey key = any_missing ? GroupKey::missing() : GroupKey(std::move(values));
    partition.groups[key].push_back(r);
    partition.group_key_of_row.push_back(std::move(key));
  }
  return partition;
}

}  // namespace fairlens
