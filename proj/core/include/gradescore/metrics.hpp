#pragma once

// Scores a judge's behavior over one row's Latin-square rounds.
//
// Three quantities, all in [0, 1]:
// - LLM Score: Shannon entropy of the selected positions, normalized by the
//   maximum entropy log2(n). 1 = no positional pattern, 0 = always the same
//   position.
// - Choice Score: frequency of the most-often-selected option divided by the
//   number of rounds. 1 = the same option chosen every round.
// - Grade Score: harmonic mean of the two. High only when the judge is both
//   position-agnostic and content-consistent.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace gradescore {

/// Per-row tallies over one set of rounds: which positions the judge picked
/// and which option identities occupied them.
struct SelectionTrace {
  int n_options = 0;  // options per round, including any distractor
  std::map<int, std::uint64_t> position_counts;        // 1-based position -> picks
  std::map<std::string, std::uint64_t> option_counts;  // option id -> picks
  std::uint64_t total_rounds = 0;
};

struct ScoreBreakdown {
  double llm_score = 0.0;
  double choice_score = 0.0;
  double grade_score = 0.0;
  double entropy_bits = 0.0;
  double max_entropy_bits = 0.0;
  std::uint64_t mode_count = 0;
  std::uint64_t total_rounds = 0;
};

struct AggregateSummary {
  std::optional<double> mean_grade;
  std::optional<double> mean_llm;
  std::optional<double> mean_choice;
  std::size_t n_rows = 0;  // rows included in the means
  std::size_t n_excluded = 0;
};

/// Shannon entropy in bits over the selected positions. Zero counts
/// contribute nothing. Throws Error("empty trace") when no count is positive.
double index_entropy(const std::map<int, std::uint64_t>& position_counts);

/// log2(n_options). Throws Error on n_options == 0.
double max_entropy(int n_options);

/// index_entropy normalized by max_entropy(n_options). Unselected positions
/// still count toward n_options. Throws Error("degenerate option set") for
/// n_options < 2 and Error on positions outside 1..n_options.
double llm_score(const std::map<int, std::uint64_t>& position_counts, int n_options);

/// Mode frequency over option identities: max count / total_rounds. Ties
/// share the maximal count. Throws Error("empty trace") on empty counts.
double choice_score(const std::map<std::string, std::uint64_t>& option_counts,
                    std::uint64_t total_rounds);

/// Harmonic mean 2*l*c/(l+c); 0 when both inputs are 0. Inputs must lie in
/// [0, 1].
double grade_score(double llm, double choice);

/// Full per-row breakdown. Validates the trace invariants.
ScoreBreakdown score_trial(const SelectionTrace& trace);

/// Arithmetic means over included rows. Empty input leaves the means absent.
AggregateSummary aggregate(std::span<const ScoreBreakdown> breakdowns,
                           std::size_t n_excluded = 0);

}  // namespace gradescore
