#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "skewwalk/errors.hpp"

namespace skewwalk {

/// Doubles are printed with 17 significant digits, enough to round-trip the
/// value exactly, so file digests are stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

struct ManifestFile {
  std::string name;
  std::string digest;  // FNV-1a 64 of the file bytes
  std::uint64_t bytes = 0;
  std::uint64_t rows = 0;
};

struct RunManifest {
  std::string version;
  std::string command;
  std::vector<std::string> config_argv;  // canonical flag echo
  std::uint64_t master_seed = 0;
  std::string timestamp;  // not covered by any digest
  std::vector<ManifestFile> files;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["command"] = m.command;
  j["config"] = m.config_argv;
  j["master_seed"] = m.master_seed;
  j["timestamp"] = m.timestamp;
  j["files"] = nlohmann::json::array();
  for (const auto& f : m.files)
    j["files"].push_back({{"name", f.name},
                          {"digest", f.digest},
                          {"bytes", f.bytes},
                          {"rows", f.rows}});
  return j;
}

using Cell = std::variant<long long, double, std::string>;

/// Tabular report buffered in memory and flushed in one write, so a file is
/// either complete or absent. The same rows serialize to CSV or to a JSON
/// array of objects; the JSON variant embeds the reproducibility part of
/// the manifest (no timestamp, so re-runs stay byte-identical).
class TableWriter {
 public:
  TableWriter(std::string name, std::vector<std::string> columns)
      : name_(std::move(name)), columns_(std::move(columns)) {}

  const std::string& name() const noexcept { return name_; }
  std::uint64_t rows() const noexcept { return rows_; }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_.size())
      throw std::logic_error("row width does not match schema");
    rows_data_.push_back(cells);
    ++rows_;
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out += ',';
      out += columns_[i];
    }
    out += '\n';
    for (const auto& cells : rows_data_) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cell_text(cells[i]);
      }
      out += '\n';
    }
    return out;
  }

  std::string to_json(const RunManifest& embedded) const {
    nlohmann::json j;
    j["manifest"] = {{"version", embedded.version},
                     {"command", embedded.command},
                     {"config", embedded.config_argv},
                     {"master_seed", embedded.master_seed}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& cells : rows_data_) {
      nlohmann::json obj;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (std::holds_alternative<long long>(c))
          obj[columns_[i]] = std::get<long long>(c);
        else if (std::holds_alternative<double>(c))
          obj[columns_[i]] = std::get<double>(c);
        else
          obj[columns_[i]] = std::get<std::string>(c);
      }
      rows.push_back(obj);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
  }

 private:
  static std::string cell_text(const Cell& c) {
    if (std::holds_alternative<long long>(c))
      return std::to_string(std::get<long long>(c));
    if (std::holds_alternative<double>(c))
      return format_double(std::get<double>(c));
    return std::get<std::string>(c);
  }

  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_data_;
  std::uint64_t rows_ = 0;
};

/// Writes `bytes` to dir/name and records it in the manifest.
inline void emit_file(const std::filesystem::path& dir, const std::string& name,
                      const std::string& bytes, RunManifest& manifest,
                      std::uint64_t rows) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw resource_error("cannot write output file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw resource_error("failed while writing " + path.string());
  ManifestFile f;
  f.name = name;
  f.digest = digest_hex(bytes);
  f.bytes = bytes.size();
  f.rows = rows;
  manifest.files.push_back(f);
}

}  // namespace skewwalk
