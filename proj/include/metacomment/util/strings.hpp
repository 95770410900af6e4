#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metacomment {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower_ascii(std::string_view s);

// Reads a whole file; throws DataError if it cannot be opened.
std::string read_file(const std::string& path);

// RFC 4180 field quoting for CSV output.
std::string csv_escape(std::string_view field);
// Parses CSV text into records (quoted fields may span lines).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace metacomment
