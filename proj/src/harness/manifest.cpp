#include "pam/harness/manifest.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "pam/checksum.hpp"
#include "pam/error.hpp"
#include "pam/tensor_io.hpp"

namespace pam::harness {

using nlohmann::json;

std::vector<FileRecord> inventory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<FileRecord> out;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, ec), end; it != end && !ec; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto rel = fs::relative(it->path(), root).generic_string();
    if (rel == "manifest.json") continue;
    out.push_back({rel, sha256_file(it->path()), it->file_size()});
  }
  if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
  std::sort(out.begin(), out.end(), [](const FileRecord& a, const FileRecord& b) { return a.path < b.path; });
  return out;
}

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["config"] = m.config;
  json reps = json::array();
  for (std::size_t r = 0; r < m.replica_seeds.size(); ++r) reps.push_back({{"replica", r + 1}, {"seed", m.replica_seeds[r]}});
  j["replicas"] = std::move(reps);
  json files = json::array();
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = std::move(files);
  return j.dump(1) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& r : j.at("replicas")) m.replica_seeds.push_back(r.at("seed").get<std::uint64_t>());
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
}

std::filesystem::path write_manifest(const std::filesystem::path& root, const RunManifest& m) {
  const auto path = root / "manifest.json";
  write_text(path, manifest_to_json(m));
  return path;
}

}  // namespace pam::harness
