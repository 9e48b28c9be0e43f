#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfshield::csv {

// Splits one CSV record into fields. Double-quoted fields may contain commas
// and "" escapes; records spanning several lines are not supported.
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

// Quotes a field when it contains a comma, quote or line break.
std::string quote(std::string_view field);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace lfshield::csv
