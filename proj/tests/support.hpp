#pragma once

// Shared test helpers: temp dirs, corpus builders, subprocess capture.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "gradescore/corpus.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "gradescore_test_XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream content;
  content << in.rdbuf();
  return content.str();
}

inline gradescore::CorpusRow make_row(const std::string& row_id, int n_options) {
  gradescore::CorpusRow row;
  row.row_id = row_id;
  row.instruction = "Instruction for " + row_id;
  for (int i = 0; i < n_options; ++i) {
    gradescore::CandidateOption option;
    option.option_id = std::string(1, static_cast<char>('a' + i));
    option.text = "Response " + option.option_id + " of " + row_id;
    row.options.push_back(std::move(option));
  }
  return row;
}

inline std::vector<gradescore::CorpusRow> make_corpus(int n_rows, int n_options) {
  std::vector<gradescore::CorpusRow> rows;
  rows.reserve(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    char row_id[16];
    std::snprintf(row_id, sizeof(row_id), "row%04d", i);
    rows.push_back(make_row(row_id, n_options));
  }
  return rows;
}

inline std::string corpus_jsonl(const std::vector<gradescore::CorpusRow>& rows) {
  std::string jsonl;
  for (const auto& row : rows) {
    nlohmann::ordered_json record;
    record["row_id"] = row.row_id;
    record["instruction"] = row.instruction;
    auto options = nlohmann::ordered_json::array();
    for (const auto& option : row.options) {
      nlohmann::ordered_json entry;
      entry["option_id"] = option.option_id;
      entry["text"] = option.text;
      if (option.preference_rank) entry["preference_rank"] = *option.preference_rank;
      options.push_back(std::move(entry));
    }
    record["options"] = std::move(options);
    jsonl += record.dump();
    jsonl += '\n';
  }
  return jsonl;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

inline CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + command);
  char buffer[4096];
  std::size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) result.output.append(buffer, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testsupport
