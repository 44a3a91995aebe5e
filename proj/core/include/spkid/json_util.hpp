#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace spkid {

/// Serializes with every floating-point number printed to 17 significant
/// digits, so reloading reproduces each double exactly. Arrays of scalars stay
/// on one line; objects are indented by two spaces. Non-finite numbers become
/// null.
std::string dump_json(const nlohmann::json& doc);

/// %.17g, the CSV spelling of a double.
std::string format_double(double v);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never observe a
/// half-written file.
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace spkid
