#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradescore/rng.hpp"

namespace gradescore {

struct CandidateOption {
  std::string option_id;  // unique within its row
  std::string text;
  std::optional<int> preference_rank;  // lower = more preferred
};

/// One judging task: a user instruction plus its candidate responses.
struct CorpusRow {
  std::string row_id;
  std::string instruction;
  std::vector<CandidateOption> options;
};

struct RejectedRecord {
  std::size_t line_number = 0;  // 1-based
  std::string reason;
};

struct LoadedCorpus {
  std::vector<CorpusRow> rows;
  std::vector<RejectedRecord> rejects;
};

/// Reads a UTF-8 line-delimited corpus: one JSON object per line with fields
/// row_id, instruction, options[{option_id, text, preference_rank?}].
/// Unknown fields are ignored, blank lines skipped. Malformed records are
/// collected into rejects with their line number; with strict == true the
/// first malformed record throws instead. Throws IoError when the file
/// cannot be read.
LoadedCorpus load_corpus(const std::filesystem::path& path, bool strict = false);

struct FilteredCorpus {
  std::vector<CorpusRow> rows;
  std::size_t removed_count = 0;
};

/// Drops rows with fewer than min_options options, preserving order.
/// min_options must be >= 2.
FilteredCorpus filter_eligible(const std::vector<CorpusRow>& rows, int min_options);

struct SampledDistractor {
  std::string source_row_id;
  std::string text;
};

/// Draws one option text from a row other than current_row_id: first the
/// source row uniformly among eligible rows, then one of its options
/// uniformly. Throws Error("no distractor source") when no other row has
/// options.
SampledDistractor sample_unrelated(const std::vector<CorpusRow>& rows,
                                   const std::string& current_row_id, Rng& rng);

}  // namespace gradescore
