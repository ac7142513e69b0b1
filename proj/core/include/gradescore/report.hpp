#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gradescore/runner.hpp"

namespace gradescore {

/// Provenance record emitted alongside every report.
struct RunManifest {
  std::string tool_version;
  std::string config_digest;  // hex hash over resolved config + corpus bytes
  std::string corpus_path;
  std::size_t corpus_rows = 0;
  std::vector<std::string> template_ids;
  std::vector<std::string> judges;
  std::uint64_t seed = 0;
  std::string started_at;  // ISO 8601 UTC
  std::string finished_at;
};

struct ReportPaths {
  std::filesystem::path summary_csv;
  std::filesystem::path rows_jsonl;
  std::filesystem::path summary_md;
  std::filesystem::path manifest_json;
};

/// Writes summary.csv, rows.jsonl, summary.md and manifest.json into
/// out_dir (created on demand). Files are staged under temporary names and
/// renamed into place; on failure the partial files are removed. Existing
/// report files are only replaced with force == true, otherwise ConfigError.
ReportPaths write_reports(const ExperimentReport& report, const RunManifest& manifest,
                          const std::filesystem::path& out_dir, bool force = false);

/// Fixed 6-decimal rendering used for every score in summary.csv/.md.
std::string format_score(double value);

/// 16-hex-digit FNV-1a digest of the canonical run inputs.
std::string config_digest(const std::string& canonical_config);

}  // namespace gradescore
