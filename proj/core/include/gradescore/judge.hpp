#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradescore/prompting.hpp"
#include "gradescore/rng.hpp"

namespace gradescore {

enum class JudgeKind {
  remote_chat,
  mock_first_position,
  mock_fixed_content,
  mock_uniform_random,
  mock_positional_weights,
};

struct JudgeConfig {
  JudgeKind kind = JudgeKind::mock_uniform_random;
  std::optional<std::string> endpoint_url;  // remote_chat
  std::optional<std::string> model_name;    // remote_chat
  double temperature = 0.0;
  int timeout_ms = 30000;
  /// mock_fixed_content: option id to select every round. Empty means the
  /// lexicographically smallest id of each round's option set.
  std::string fixed_target;
  std::vector<double> weights;  // mock_positional_weights
  /// Environment variable holding the bearer token for remote judges.
  std::string token_env = "JUDGE_API_TOKEN";
};

/// Parses a judge spec string: "remote:<url>,<model>", "mock:first",
/// "mock:fixed", "mock:fixed:<option_id>", "mock:uniform" or
/// "mock:weights:<w1,w2,...>". Throws ConfigError on anything else.
JudgeConfig parse_judge_spec(const std::string& spec);

/// Spec-string form of a config; round-trips parse_judge_spec.
std::string describe(const JudgeConfig& config);

/// Enforces the config invariants (remote needs url+model, weights positive,
/// bounds). Throws ConfigError.
void validate(const JudgeConfig& config);

struct JudgeVerdict {
  std::string raw_text;
  int parsed_position = 0;  // 1-based
  std::int64_t latency_ms = 0;
  int attempt = 1;
};

/// One judge behind a uniform surface. Implementations are stateless and
/// safe for concurrent query() calls; randomized mocks draw from the
/// caller-supplied engine so reproducibility is the caller's to arrange.
class Judge {
 public:
  virtual ~Judge() = default;

  /// Runs one round and returns the judge's full reply text. The remote
  /// adapter sends system_text/user_text over the chat-completions wire
  /// format and never retries. Mocks pick a position locally and format it
  /// with answer_marker.
  virtual std::string query(const RenderedPrompt& prompt,
                            const std::string& answer_marker, Rng& rng) const = 0;
};

std::unique_ptr<Judge> make_judge(const JudgeConfig& config);

/// Extracts the judge's selected 1-based position. The answer_marker pattern
/// wins (last occurrence); without it the last in-range "Option k" mention
/// is used. Throws ParseError when nothing in range can be extracted.
int parse_selection(const std::string& raw_text, int n_options,
                    const std::string& answer_marker);

/// Position k (1-based) with probability weights[k-1] / sum(weights).
int choose_weighted_position(std::span<const double> weights, Rng& rng);

/// query + parse + timing for one attempt. Propagates query and parse errors.
JudgeVerdict query_and_parse(const Judge& judge, const RenderedPrompt& prompt,
                             const std::string& answer_marker, int attempt,
                             Rng& rng);

}  // namespace gradescore
