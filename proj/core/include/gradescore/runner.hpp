#pragma once

// Monte Carlo protocol driver. Per row: optionally inject one unrelated
// option, generate the cyclic rotations, query the judge once per rotation,
// tally the trace and score it. Rows run concurrently; rounds within a row
// run sequentially. Per-row rng streams derive from (seed, row_id), so
// results do not depend on scheduling.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradescore/corpus.hpp"
#include "gradescore/judge.hpp"
#include "gradescore/metrics.hpp"
#include "gradescore/prompting.hpp"
#include "gradescore/rng.hpp"

namespace gradescore {

struct TrialConfig {
  std::string template_id = "prompt1";
  bool use_random_option = false;
  int min_options = 2;
  int max_parse_retries = 2;
  std::uint64_t seed = 0;
  int concurrency = 1;
  JudgeConfig judge;
};

struct RoundRecord {
  int rotation_index = 0;   // 0-based index into the plan's rotations
  int parsed_position = 0;  // 1-based
  std::string option_id;    // option occupying the parsed position
  int attempts = 1;         // queries issued for this round
};

struct RowResult {
  std::string row_id;
  SelectionTrace trace;
  std::optional<ScoreBreakdown> scores;  // absent when excluded
  std::optional<std::string> distractor_source;
  bool excluded = false;
  std::optional<std::string> exclusion_reason;
  std::vector<RoundRecord> per_round;
};

struct CellResult {
  std::string judge_label;
  std::string template_id;
  bool use_random_option = false;
  AggregateSummary summary;
  std::vector<RowResult> rows;  // corpus order
};

struct ExperimentReport {
  std::vector<CellResult> cells;
};

/// Option count a row needs to enter a trial under this config.
int effective_min_options(const TrialConfig& config);

/// Runs the full protocol for one row against the given judge. The corpus is
/// the distractor source pool; rng must be the row's own stream. Parse
/// failures are re-queried up to config.max_parse_retries, then the row is
/// excluded; transport failures exclude immediately.
RowResult run_row(const CorpusRow& row, const PromptTemplate& tmpl,
                  const TrialConfig& config, const std::vector<CorpusRow>& corpus,
                  Rng& rng, const Judge& judge);

/// Same, constructing the judge from config.judge.
RowResult run_row(const CorpusRow& row, const PromptTemplate& tmpl,
                  const TrialConfig& config, const std::vector<CorpusRow>& corpus,
                  Rng& rng);

/// Runs one cell per config: filters eligible rows, drives them through
/// run_row with at most config.concurrency rows in flight, and aggregates.
/// Throws Error("empty experiment") when a cell has no eligible rows.
ExperimentReport run_experiment(const std::vector<CorpusRow>& corpus,
                                const std::vector<PromptTemplate>& templates,
                                const std::vector<TrialConfig>& configs);

}  // namespace gradescore
