#pragma once

// Run manifest written next to every command's outputs. Lists each emitted
// file with its SHA-256 so two runs can be compared by hash alone.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace softland {

inline constexpr const char* kToolVersion = "0.1.0";

struct FileEntry {
    std::string path;  // relative to the manifest directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string started_utc;
    std::string finished_utc;
    std::vector<FileEntry> files;
};

/// Lower-case hex SHA-256 of a file's bytes. Throws std::runtime_error if
/// the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// ISO 8601 UTC timestamp with second resolution, e.g. 2024-01-31T12:00:00Z.
std::string utc_now();

/// Hashes each path and appends it, stored relative to base.
void add_files(RunManifest& m, const std::filesystem::path& base,
               const std::vector<std::filesystem::path>& paths);

nlohmann::json to_json(const RunManifest& m);

/// Writes manifest.json into dir and returns its path.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace softland
