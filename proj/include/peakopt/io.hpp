#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
/// Throws ParseError on anything but a complete numeric token.
double parse_number(std::string_view text);
long parse_integer(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace peakopt
