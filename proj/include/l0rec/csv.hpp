#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace l0rec::csv {

/// Shortest-round-trip-safe text for a double: 17 significant digits.
std::string fmt(double v);

/// Quotes a field when it contains a comma, quote or newline (RFC 4180).
std::string quote(std::string_view field);

/// Splits one CSV record, honoring RFC 4180 quoting.
std::vector<std::string> split(std::string_view line);

/// Writes fields joined by commas, terminated with '\n'.
void write_row(std::ostream& os, const std::vector<std::string>& fields);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

}  // namespace l0rec::csv
