#include "gradescore/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "gradescore/errors.hpp"

namespace gradescore {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// Parses one record or explains why it is invalid.
std::optional<std::string> parse_row(const std::string& line, CorpusRow& row) {
  const auto record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) return "invalid JSON object";

  const auto row_id = record.find("row_id");
  if (row_id == record.end() || !row_id->is_string()) return "missing or non-string row_id";
  row.row_id = row_id->get<std::string>();
  if (row.row_id.empty()) return "empty row_id";

  const auto instruction = record.find("instruction");
  if (instruction == record.end() || !instruction->is_string()) {
    return "missing or non-string instruction";
  }
  row.instruction = instruction->get<std::string>();
  if (row.instruction.empty()) return "empty instruction";

  const auto options = record.find("options");
  if (options == record.end() || !options->is_array() || options->empty()) {
    return "options must be a non-empty array";
  }

  std::unordered_set<std::string> ids;
  std::size_t ranked = 0;
  for (const auto& entry : *options) {
    if (!entry.is_object()) return "option is not an object";
    CandidateOption option;

    const auto id = entry.find("option_id");
    if (id == entry.end() || !id->is_string()) return "option missing option_id";
    option.option_id = id->get<std::string>();
    if (option.option_id.empty()) return "empty option_id";
    if (!ids.insert(option.option_id).second) {
      return "duplicate option_id: " + option.option_id;
    }

    const auto text = entry.find("text");
    if (text == entry.end() || !text->is_string()) return "option missing text";
    option.text = text->get<std::string>();
    if (option.text.empty()) return "empty option text";

    const auto rank = entry.find("preference_rank");
    if (rank != entry.end() && !rank->is_null()) {
      if (!rank->is_number_integer()) return "preference_rank must be an integer";
      option.preference_rank = rank->get<int>();
      ++ranked;
    }
    row.options.push_back(std::move(option));
  }
  if (ranked != 0 && ranked != row.options.size()) {
    return "preference_rank must be present on all options or none";
  }
  return std::nullopt;
}

}  // namespace

LoadedCorpus load_corpus(const std::filesystem::path& path, bool strict) {
  std::ifstream input(path);
  if (!input) throw IoError("cannot read corpus file: " + path.string());

  LoadedCorpus corpus;
  std::unordered_set<std::string> row_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(input, line)) {
    ++line_number;
    if (is_blank(line)) continue;

    CorpusRow row;
    auto problem = parse_row(line, row);
    if (!problem && !row_ids.insert(row.row_id).second) {
      problem = "duplicate row_id: " + row.row_id;
    }
    if (problem) {
      if (strict) {
        throw Error("corpus line " + std::to_string(line_number) + ": " + *problem);
      }
      corpus.rejects.push_back({line_number, *problem});
      continue;
    }
    corpus.rows.push_back(std::move(row));
  }
  if (input.bad()) throw IoError("read failure on corpus file: " + path.string());
  return corpus;
}

FilteredCorpus filter_eligible(const std::vector<CorpusRow>& rows, int min_options) {
  if (min_options < 2) throw ConfigError("min_options must be at least 2");

  FilteredCorpus filtered;
  filtered.rows.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.options.size() >= static_cast<std::size_t>(min_options)) {
      filtered.rows.push_back(row);
    } else {
      ++filtered.removed_count;
    }
  }
  return filtered;
}

SampledDistractor sample_unrelated(const std::vector<CorpusRow>& rows,
                                   const std::string& current_row_id, Rng& rng) {
  std::vector<std::size_t> eligible;
  eligible.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].row_id != current_row_id && !rows[i].options.empty()) {
      eligible.push_back(i);
    }
  }
  if (eligible.empty()) throw Error("no distractor source");

  const CorpusRow& source = rows[eligible[uniform_index(rng, eligible.size())]];
  const CandidateOption& option = source.options[uniform_index(rng, source.options.size())];
  return {source.row_id, option.text};
}

}  // namespace gradescore
