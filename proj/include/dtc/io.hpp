#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtc/errors.hpp"

namespace dtc {

// Fixed 12-significant-digit formatting: reruns must produce byte-identical
// files.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Write-then-rename so failed runs never leave partial output files.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : ncols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) os_ << ",";
      os_ << header[i];
    }
    os_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw DimensionError("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ",";
      os_ << cells[i];
    }
    os_ << "\n";
  }

  std::string str() const { return os_.str(); }

 private:
  std::size_t ncols_;
  std::ostringstream os_;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Content-addressed on-disk cache. The full key string is stored in the
// payload and verified on read, so hash collisions degrade to misses.
class PointCache {
 public:
  PointCache() = default;
  PointCache(std::filesystem::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
    if (enabled_) std::filesystem::create_directories(dir_);
  }

  std::optional<nlohmann::json> get(const std::string& key) const {
    if (!enabled_) return std::nullopt;
    const auto p = path_of(key);
    std::ifstream in(p);
    if (!in) return std::nullopt;
    try {
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.value("key", "") != key) return std::nullopt;
      return j;
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  void put(const std::string& key, nlohmann::json payload) const {
    if (!enabled_) return;
    payload["key"] = key;
    write_text_atomic(path_of(key), payload.dump());
  }

  bool enabled() const { return enabled_; }

 private:
  std::filesystem::path path_of(const std::string& key) const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    return dir_ / (std::string(buf) + ".json");
  }

  std::filesystem::path dir_;
  bool enabled_ = false;
};

}  // namespace dtc
