#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ospde/grid.hpp"

namespace ospde {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_number(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// FNV-1a of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Writes to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

/// CSV "t,x[,y],value" of every slice of a scalar field (or of `column` names for wider fields).
std::string field_csv(const SpaceTimeGrid& grid, const SpaceTimeField& field, const std::string& column);

}  // namespace ospde
