#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pulse::csv {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
// Returns false on an unterminated quote.
bool split_row(std::string_view line, std::vector<std::string>& fields);

// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

// Formats a real with 6 significant digits ("%.6g"); non-finite values
// become "nan", "inf" or "-inf".
std::string fmt(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace pulse::csv
