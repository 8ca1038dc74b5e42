#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nnl {

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// Writes to a temporary sibling, then renames it over `path`, so readers see
/// either the old file or the complete new one.
void write_file_atomic(const std::string& path, std::string_view contents);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents);

}  // namespace nnl
