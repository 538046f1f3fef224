#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fairlens::csv {

using Record = std::vector<std::string>;

/// Splits RFC 4180 text into records. Accepts LF or CRLF line ends, quoted
/// fields with embedded commas, quotes ("") and newlines. A blank trailing
/// line is not a record. Throws InputError on an unterminated quote.
std::vector<Record> parse(std::istream& in);

/// Writes one record, quoting only the fields that need it.
void write_record(std::ostream& out, std::span<const std::string> fields);

}  // namespace fairlens::csv
