#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace morpho::csv {

// Minimal RFC 4180 reader: comma delimiter, optional double quotes,
// LF or CRLF line endings. Returns false at end of input.
bool read_row(std::istream& in, std::vector<std::string>& fields);

// Quotes the field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// "%.9g"
std::string format_sig9(double v);

}  // namespace morpho::csv
