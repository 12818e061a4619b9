#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace boostlens::csv {

/// Parses RFC-4180 style CSV: comma separator, double-quote quoting, ""
/// escaping a quote inside a quoted field. LF and CRLF both end a row.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Reads and parses a whole file. Throws DataError if the file is missing.
std::vector<std::vector<std::string>> read_file(const std::string& path);

/// Quotes a field only when it contains a comma, quote, or newline.
std::string escape_field(const std::string& field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

}  // namespace boostlens::csv
