#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace imcrawler {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool iequals(std::string_view a, std::string_view b);

// Collapses runs of ASCII whitespace to one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::optional<std::int64_t> parse_int(std::string_view s);

// Escapes &, <, >, " and ' for HTML text and attribute values.
std::string escape_html(std::string_view s);

// ISO-8601 UTC with millisecond precision: 2024-05-01T10:22:03.120Z
std::string format_timestamp(std::chrono::system_clock::time_point tp);
inline std::string timestamp_now() { return format_timestamp(std::chrono::system_clock::now()); }

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

} // namespace imcrawler
