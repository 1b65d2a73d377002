#pragma once

// Small CSV helpers: shortest round-trip number formatting and RFC 4180
// field quoting.

#include <string>
#include <string_view>
#include <vector>

namespace mortmix::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

/// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> split_record(std::string_view line);

/// Strict full-string parse; throws std::invalid_argument on trailing junk.
double parse_number(std::string_view text);

}  // namespace mortmix::csv
