#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tenq {

std::string read_file(const std::filesystem::path& p);
// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view data);
void append_line(const std::filesystem::path& p, std::string_view line);

}  // namespace tenq
