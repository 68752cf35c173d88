#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tcpr {

// Reads a whole file in binary mode. Throws IoFailure.
std::string read_file_bytes(const std::filesystem::path& path);

// Writes bytes to `path` atomically: the content lands in a sibling
// temporary file first and is renamed over the target, so a crash or a
// concurrent reader never observes a half-written file. Throws IoFailure.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace tcpr
