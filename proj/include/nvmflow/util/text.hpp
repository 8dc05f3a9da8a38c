#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nvmflow::util {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Parses a SPICE-style number: a decimal literal, an optional scale suffix
/// (f p n u m k meg g t, case-insensitive) and optional trailing unit letters
/// ("10pF", "1.5meg", "3V"). Returns nullopt on anything else.
std::optional<double> parse_number(std::string_view token);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

struct KeyValue {
    std::string key; // lowercased
    std::string value;
    int line = 0;
};

/// Reads `key=value` lines; blank lines and '#' comments are skipped.
/// Throws std::invalid_argument with the line number on malformed lines.
std::vector<KeyValue> parse_key_value_lines(std::string_view text);

/// Splits "key=value" (no whitespace inside). Returns nullopt when there is no '='.
std::optional<std::pair<std::string, std::string>> split_assignment(std::string_view token);

std::string read_file(const std::string& path);

} // namespace nvmflow::util
