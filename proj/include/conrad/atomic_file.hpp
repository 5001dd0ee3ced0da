#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace conrad {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// see either the old content or the complete new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace conrad
