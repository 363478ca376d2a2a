#pragma once

// Small text helpers shared by the file readers and writers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cipherpos::tsv {

std::vector<std::string> split(std::string_view line, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool valid_utf8(std::string_view text);

// Reads a whole file as lines with trailing '\r' stripped. Throws InputError
// when the file cannot be opened or is not valid UTF-8.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes `content` atomically enough for batch use (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view content);

// Shortest-free, round-trippable rendering of a double (17 significant digits).
std::string format_double(double value);

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// Splits "#key=value"; returns false if the line is not a header of that shape.
bool parse_header(std::string_view line, std::string& key, std::string& value);

}  // namespace cipherpos::tsv
