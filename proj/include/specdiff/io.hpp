#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specdiff/errors.hpp"

namespace specdiff {

/// 17 significant digits of scientific notation: round-trips any double.
inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

/// FNV-1a, used to fingerprint the canonical config text.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Write content to path atomically: temp file in the same directory, fsync
/// via stream close, then rename. Parent directories are created.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << content;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string());
}

/// CSV table writer: fixed header, every numeric cell in full precision.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string render() const {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out += ",";
      out += header[i];
    }
    out += "\n";
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) {
        if (i) out += ",";
        out += format_full(r[i]);
      }
      out += "\n";
    }
    return out;
  }
};

/// Best-effort current git revision; "unknown" outside a repo.
inline std::string git_revision() {
  FILE* p = ::popen("git rev-parse HEAD 2>/dev/null", "r");
  if (!p) return "unknown";
  char buf[64] = {0};
  std::string rev;
  if (std::fgets(buf, sizeof(buf), p)) rev = buf;
  ::pclose(p);
  while (!rev.empty() && (rev.back() == '\n' || rev.back() == '\r')) rev.pop_back();
  return rev.empty() ? "unknown" : rev;
}

/// Write a CSV plus its metadata sidecar (<name>.meta.json). The sidecar
/// records everything needed to reproduce the file except wall time.
inline void write_artifact(const std::filesystem::path& csv_path, const CsvTable& table,
                           const std::string& canonical_config, double wall_seconds,
                           const std::vector<std::string>& warnings = {}) {
  atomic_write(csv_path, table.render());
  nlohmann::json meta;
  meta["artifact"] = csv_path.filename().string();
  meta["config_hash"] = fnv1a(canonical_config);
  meta["config"] = canonical_config;
  meta["git_revision"] = git_revision();
  meta["wall_time_seconds"] = wall_seconds;
  meta["warnings"] = warnings;
  std::filesystem::path mp = csv_path;
  mp += ".meta.json";
  atomic_write(mp, meta.dump(2) + "\n");
}

}  // namespace specdiff
