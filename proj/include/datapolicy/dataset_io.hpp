#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "datapolicy/safe_set.hpp"

namespace datapolicy {

inline constexpr const char* kDatasetFormat = "ss-v1";

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

nlohmann::json dataset_to_json(const SafeSetStore& store);

/// `source` prefixes error messages (usually the file name). Throws
/// ParseError on schema problems, VersionError on a foreign format string,
/// ValidationError when a validated dataset no longer validates.
SafeSetStore dataset_from_json(const nlohmann::json& doc, const std::string& source = "dataset");

void save_dataset(const SafeSetStore& store, const std::filesystem::path& path);
SafeSetStore load_dataset(const std::filesystem::path& path);

/// Reads and parses a JSON file; syntax errors carry the line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace datapolicy
