#include "gradescore/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gradescore/errors.hpp"

namespace gradescore {

double index_entropy(const std::map<int, std::uint64_t>& position_counts) {
  std::uint64_t total = 0;
  for (const auto& [position, count] : position_counts) total += count;
  if (total == 0) throw Error("empty trace");

  double entropy = 0.0;
  for (const auto& [position, count] : position_counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(total);
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double max_entropy(int n_options) {
  if (n_options < 1) throw Error("max_entropy: option count must be positive");
  return std::log2(static_cast<double>(n_options));
}

double llm_score(const std::map<int, std::uint64_t>& position_counts, int n_options) {
  if (n_options < 2) throw Error("degenerate option set");
  for (const auto& [position, count] : position_counts) {
    if (position < 1 || position > n_options) {
      throw Error("position out of range: " + std::to_string(position));
    }
  }
  return index_entropy(position_counts) / max_entropy(n_options);
}

double choice_score(const std::map<std::string, std::uint64_t>& option_counts,
                    std::uint64_t total_rounds) {
  if (option_counts.empty()) throw Error("empty trace");
  if (total_rounds == 0) throw Error("choice_score: zero rounds");

  std::uint64_t tallied = 0;
  std::uint64_t mode_count = 0;
  for (const auto& [option, count] : option_counts) {
    tallied += count;
    mode_count = std::max(mode_count, count);
  }
  if (tallied != total_rounds) throw Error("choice_score: counts do not sum to total rounds");
  return static_cast<double>(mode_count) / static_cast<double>(total_rounds);
}

double grade_score(double llm, double choice) {
  if (!(llm >= 0.0 && llm <= 1.0) || !(choice >= 0.0 && choice <= 1.0)) {
    throw Error("grade_score: inputs must lie in [0, 1]");
  }
  const double denominator = llm + choice;
  if (denominator == 0.0) return 0.0;
  return 2.0 * llm * choice / denominator;
}

ScoreBreakdown score_trial(const SelectionTrace& trace) {
  std::uint64_t position_total = 0;
  for (const auto& [position, count] : trace.position_counts) position_total += count;
  std::uint64_t option_total = 0;
  std::uint64_t mode_count = 0;
  for (const auto& [option, count] : trace.option_counts) {
    option_total += count;
    mode_count = std::max(mode_count, count);
  }
  if (position_total != trace.total_rounds || option_total != trace.total_rounds) {
    throw Error("score_trial: inconsistent trace");
  }

  ScoreBreakdown breakdown;
  breakdown.total_rounds = trace.total_rounds;
  breakdown.mode_count = mode_count;
  breakdown.entropy_bits = index_entropy(trace.position_counts);
  breakdown.max_entropy_bits = max_entropy(trace.n_options);
  breakdown.llm_score = llm_score(trace.position_counts, trace.n_options);
  breakdown.choice_score = choice_score(trace.option_counts, trace.total_rounds);
  breakdown.grade_score = grade_score(breakdown.llm_score, breakdown.choice_score);
  return breakdown;
}

AggregateSummary aggregate(std::span<const ScoreBreakdown> breakdowns,
                           std::size_t n_excluded) {
  AggregateSummary summary;
  summary.n_rows = breakdowns.size();
  summary.n_excluded = n_excluded;
  if (breakdowns.empty()) return summary;

  double grade_sum = 0.0, llm_sum = 0.0, choice_sum = 0.0;
  for (const auto& breakdown : breakdowns) {
    grade_sum += breakdown.grade_score;
    llm_sum += breakdown.llm_score;
    choice_sum += breakdown.choice_score;
  }
  const double n = static_cast<double>(breakdowns.size());
  summary.mean_grade = grade_sum / n;
  summary.mean_llm = llm_sum / n;
  summary.mean_choice = choice_sum / n;
  return summary;
}

}  // namespace gradescore
