#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace weep::csv {

// Shortest decimal text that parses back to the identical double
// (std::to_chars round-trip form).
std::string format_double(double v);

// Like format_double but guarantees a decimal point or exponent, so integral
// values print as "20.0" rather than "20".
std::string format_decimal(double v);

// Splits one CSV line on commas. No quoting rules: fields must not contain
// commas or newlines.
std::vector<std::string> split_fields(std::string_view line);

std::string join_fields(const std::vector<std::string>& fields);

// Splits text into lines, tolerating CRLF endings and a trailing newline.
// Keeps interior empty lines so callers can track 1-based line numbers.
std::vector<std::string> split_lines(std::string_view text);

// Strict numeric parsing; the whole field must be consumed. Returns nullopt
// on any syntax error.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

}  // namespace weep::csv
