#include "gradescore/report.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "gradescore/errors.hpp"

namespace gradescore {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string mean_or(const std::optional<double>& mean, const char* absent) {
  return mean ? format_score(*mean) : absent;
}

std::string summary_csv_text(const ExperimentReport& report) {
  std::string csv =
      "judge,prompt,rand_option,mean_grade,mean_llm_score,mean_choice_score,"
      "n_rows,n_excluded\n";
  for (const auto& cell : report.cells) {
    csv += csv_field(cell.judge_label) + ',' + csv_field(cell.template_id) + ',';
    csv += cell.use_random_option ? "true," : "false,";
    csv += mean_or(cell.summary.mean_grade, "") + ',';
    csv += mean_or(cell.summary.mean_llm, "") + ',';
    csv += mean_or(cell.summary.mean_choice, "") + ',';
    csv += std::to_string(cell.summary.n_rows) + ',';
    csv += std::to_string(cell.summary.n_excluded) + '\n';
  }
  return csv;
}

std::string summary_md_text(const ExperimentReport& report, const RunManifest& manifest) {
  std::string md = "# Grade Score summary\n\n";
  md += "Dataset: `" + manifest.corpus_path + "` (" +
        std::to_string(manifest.corpus_rows) + " rows), seed " +
        std::to_string(manifest.seed) + ", config digest `" + manifest.config_digest +
        "`.\n\n";
  md += "| judge | prompt | rand_option | mean_grade | mean_llm_score | "
        "mean_choice_score | n_rows | n_excluded |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& cell : report.cells) {
    md += "| " + cell.judge_label + " | " + cell.template_id + " | ";
    md += cell.use_random_option ? "true" : "false";
    md += " | " + mean_or(cell.summary.mean_grade, "n/a");
    md += " | " + mean_or(cell.summary.mean_llm, "n/a");
    md += " | " + mean_or(cell.summary.mean_choice, "n/a");
    md += " | " + std::to_string(cell.summary.n_rows);
    md += " | " + std::to_string(cell.summary.n_excluded) + " |\n";
  }
  return md;
}

ordered_json row_json(const CellResult& cell, const RowResult& row) {
  ordered_json record;
  record["judge"] = cell.judge_label;
  record["prompt"] = cell.template_id;
  record["rand_option"] = cell.use_random_option;
  record["row_id"] = row.row_id;
  record["excluded"] = row.excluded;
  if (row.exclusion_reason) record["exclusion_reason"] = *row.exclusion_reason;
  if (row.distractor_source) record["distractor_source"] = *row.distractor_source;

  ordered_json trace;
  trace["n_options"] = row.trace.n_options;
  trace["total_rounds"] = row.trace.total_rounds;
  ordered_json positions = ordered_json::object();
  for (const auto& [position, count] : row.trace.position_counts) {
    positions[std::to_string(position)] = count;
  }
  trace["position_counts"] = std::move(positions);
  ordered_json options = ordered_json::object();
  for (const auto& [option, count] : row.trace.option_counts) options[option] = count;
  trace["option_counts"] = std::move(options);
  record["trace"] = std::move(trace);

  if (row.scores) {
    ordered_json scores;
    scores["llm_score"] = row.scores->llm_score;
    scores["choice_score"] = row.scores->choice_score;
    scores["grade_score"] = row.scores->grade_score;
    scores["entropy_bits"] = row.scores->entropy_bits;
    scores["max_entropy_bits"] = row.scores->max_entropy_bits;
    scores["mode_count"] = row.scores->mode_count;
    scores["total_rounds"] = row.scores->total_rounds;
    record["scores"] = std::move(scores);
  }

  ordered_json rounds = ordered_json::array();
  for (const auto& round : row.per_round) {
    ordered_json entry;
    entry["rotation_index"] = round.rotation_index;
    entry["parsed_position"] = round.parsed_position;
    entry["option_id"] = round.option_id;
    entry["attempts"] = round.attempts;
    rounds.push_back(std::move(entry));
  }
  record["per_round"] = std::move(rounds);
  return record;
}

std::string rows_jsonl_text(const ExperimentReport& report) {
  std::string jsonl;
  for (const auto& cell : report.cells) {
    for (const auto& row : cell.rows) {
      jsonl += row_json(cell, row).dump();
      jsonl += '\n';
    }
  }
  return jsonl;
}

std::string manifest_json_text(const RunManifest& manifest) {
  ordered_json doc;
  doc["tool_version"] = manifest.tool_version;
  doc["config_digest"] = manifest.config_digest;
  doc["dataset"] = {{"path", manifest.corpus_path}, {"row_count", manifest.corpus_rows}};
  doc["template_ids"] = manifest.template_ids;
  doc["judges"] = manifest.judges;
  doc["seed"] = manifest.seed;
  doc["started_at"] = manifest.started_at;
  doc["finished_at"] = manifest.finished_at;
  return doc.dump(2) + "\n";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream output(path, std::ios::binary | std::ios::trunc);
  if (!output) throw IoError("cannot write " + path.string());
  output << content;
  output.flush();
  if (!output) throw IoError("write failure on " + path.string());
}

}  // namespace

std::string format_score(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string config_digest(const std::string& canonical_config) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config)));
  return buffer;
}

ReportPaths write_reports(const ExperimentReport& report, const RunManifest& manifest,
                          const std::filesystem::path& out_dir, bool force) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  const ReportPaths paths{out_dir / "summary.csv", out_dir / "rows.jsonl",
                          out_dir / "summary.md", out_dir / "manifest.json"};
  const fs::path targets[] = {paths.summary_csv, paths.rows_jsonl, paths.summary_md,
                              paths.manifest_json};
  if (!force) {
    for (const auto& target : targets) {
      if (fs::exists(target)) {
        throw ConfigError("output file exists (use --force to replace): " + target.string());
      }
    }
  }

  const std::string contents[] = {summary_csv_text(report), rows_jsonl_text(report),
                                  summary_md_text(report, manifest),
                                  manifest_json_text(manifest)};

  // Stage everything, then rename into place so a failure leaves no torn file.
  std::vector<fs::path> staged;
  try {
    for (std::size_t i = 0; i < 4; ++i) {
      fs::path tmp = targets[i];
      tmp += ".tmp";
      write_file(tmp, contents[i]);
      staged.push_back(tmp);
    }
    for (std::size_t i = 0; i < 4; ++i) fs::rename(staged[i], targets[i]);
  } catch (...) {
    for (const auto& tmp : staged) fs::remove(tmp, ec);
    throw;
  }
  return paths;
}

}  // namespace gradescore
