#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairlens {

enum class DType { categorical, numeric, boolean, timestamp };

enum class Role {
  feature,
  protected_attribute,
  label,
  prediction,
  score,
  timestamp,
  period,
  weight,
};

std::string_view to_string(DType dtype);
std::string_view to_string(Role role);
DType parse_dtype(std::string_view text);
/// Accepts the schema spelling ("protected", "label", ...).
Role parse_role(std::string_view text);

/// Numeric, boolean (0/1) and timestamp (seconds since the Unix epoch) cells
/// hold a double; categorical cells hold their text.
using Value = std::variant<double, std::string>;
using Cell = std::optional<Value>;

struct Column {
  std::string name;
  DType dtype = DType::categorical;
  Role role = Role::feature;
  std::vector<Cell> cells;

  bool is_missing(std::size_t row) const { return !cells[row].has_value(); }
  /// Missing cells yield nullopt. Throws if the column is categorical.
  std::optional<double> number(std::size_t row) const;
  /// Missing cells yield nullptr. Throws if the column is not categorical.
  const std::string* text(std::size_t row) const;
  std::size_t missing_count() const;

  bool operator==(const Column&) const = default;
};

/// Immutable tabular dataset with typed, role-tagged columns.
///
/// Construction enforces the structural invariants (equal column lengths,
/// unique non-empty names, singleton roles, dtype/role compatibility, cell
/// representation matching the dtype). Value-level checks such as binary
/// labels or score bounds are reported by validate() instead, so that a
/// frame with bad values can still be loaded and inspected.
class AuditFrame {
 public:
  AuditFrame() = default;
  explicit AuditFrame(std::vector<Column> columns);

  std::size_t row_count() const { return row_count_; }
  const std::vector<Column>& columns() const { return columns_; }

  const Column* find(std::string_view name) const;
  const Column& column(std::string_view name) const;
  /// The column holding a singleton role, or nullptr.
  const Column* find_role(Role role) const;
  std::vector<const Column*> columns_with_role(Role role) const;

  /// New frame made of the given rows in the given order (duplicates allowed).
  AuditFrame select_rows(std::span<const std::size_t> rows) const;
  /// New frame with the named column replaced, or appended if absent.
  AuditFrame with_column(Column column) const;

  bool operator==(const AuditFrame&) const = default;

 private:
  std::vector<Column> columns_;
  std::size_t row_count_ = 0;
};

struct ColumnSpec {
  std::string name;
  DType dtype = DType::categorical;
  Role role = Role::feature;
};

struct SchemaSpec {
  std::string missing_token;
  std::vector<ColumnSpec> columns;

  const ColumnSpec* find(std::string_view name) const;
};

SchemaSpec parse_schema(std::string_view json_text);
SchemaSpec load_schema(const std::filesystem::path& path);

/// Reads a comma-delimited, RFC 4180 quoted CSV whose first record is the
/// header. Columns keep the header order; each must be described by the
/// schema and vice versa.
AuditFrame read_csv(std::istream& in, const SchemaSpec& schema);
AuditFrame load_csv(const std::filesystem::path& path, const SchemaSpec& schema);
void write_csv(std::ostream& out, const AuditFrame& frame, std::string_view missing_token = "");

/// Shortest text that parses back to the same double.
std::string format_number(double value);
/// ISO-8601: YYYY-MM-DD, optionally followed by [T ]HH:MM:SS and a trailing Z.
std::optional<double> parse_timestamp(std::string_view text);
std::string format_timestamp(double seconds_since_epoch);

struct ValidationIssue {
  std::string column;
  std::optional<std::size_t> row;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool usable() const { return errors.empty(); }
};

ValidationReport validate(const AuditFrame& frame);

/// Tuple of a row's protected-attribute values. Rows missing any of the
/// listed attributes share the single missing key, which sorts last.
class GroupKey {
 public:
  GroupKey() = default;
  explicit GroupKey(std::vector<std::string> values) : values_(std::move(values)) {}

  static GroupKey missing();
  /// Inverse of label(): splits on '|' and recognises the missing marker.
  static GroupKey parse(std::string_view label);

  bool is_missing() const { return missing_; }
  const std::vector<std::string>& values() const { return values_; }
  std::string label() const;

  std::strong_ordering operator<=>(const GroupKey& other) const;
  bool operator==(const GroupKey& other) const = default;

 private:
  std::vector<std::string> values_;
  bool missing_ = false;
};

inline constexpr std::string_view kMissingGroupLabel = "⟨missing⟩";

struct GroupPartition {
  std::vector<std::string> attributes;
  std::vector<GroupKey> group_key_of_row;
  /// Ordered by key; index lists ascending.
  std::map<GroupKey, std::vector<std::size_t>> groups;

  const std::vector<std::size_t>& rows_of(const GroupKey& key) const;
};

/// Groups rows by the tuple of their values in `attributes` (intersectional
/// when more than one attribute is listed).
GroupPartition partition_by_group(const AuditFrame& frame, std::span<const std::string> attributes);

}  // namespace fairlens
