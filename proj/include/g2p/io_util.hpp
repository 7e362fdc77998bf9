#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace g2p {

std::string read_file(const std::string& path);

// Writes via a temp file + rename so readers never observe partial content.
void write_file_atomic(const std::string& path, std::string_view content);

// Splits on '\n'; a trailing newline does not produce an empty final record.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace g2p
