#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pam::harness {

inline constexpr const char* kToolVersion = "0.1.0";

struct FileRecord {
  std::string path;  ///< relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::map<std::string, std::string> config;
  std::vector<std::uint64_t> replica_seeds;  ///< index r - 1 holds the seed of replica r
  std::vector<FileRecord> files;
};

/// Records every regular file under `root` except manifest.json, sorted by path.
std::vector<FileRecord> inventory(const std::filesystem::path& root);

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
/// Writes root/manifest.json and returns its path.
std::filesystem::path write_manifest(const std::filesystem::path& root, const RunManifest& m);

}  // namespace pam::harness
