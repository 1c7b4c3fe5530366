#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tsad::io {

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Parses a whole token (surrounding blanks allowed); false on any trailing garbage.
bool parse_double(std::string_view token, double& out);

std::string_view trim(std::string_view s);

}  // namespace tsad::io
