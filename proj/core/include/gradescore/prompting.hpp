#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gradescore {

/// Placeholder inside an answer marker that stands for the selected
/// 1-based option number.
inline constexpr std::string_view kSelectionPlaceholder = "<k>";

struct PromptTemplate {
  std::string template_id;
  std::string system_text;
  /// Pattern the judge is instructed to end its reply with, e.g.
  /// "Selection: <k>". Contains kSelectionPlaceholder exactly once.
  std::string answer_marker;
};

/// One round's fully rendered judge input.
struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
  int n_options = 0;
  std::vector<std::string> option_order;  // option ids in presented order
};

/// The four built-in templates (ids "prompt1".."prompt4"): plain
/// select-and-explain, criteria-first evaluation, explicit instruction to
/// ignore option order, and per-option point grading. The texts are this
/// tool's own wording for those intents.
std::vector<PromptTemplate> builtin_prompt_set();

/// Loads templates from a line-delimited JSON file with fields template_id,
/// system_text and optional answer_marker (defaults to "Selection: <k>").
/// Malformed records throw ConfigError naming the offending template.
std::vector<PromptTemplate> load_prompt_set(const std::filesystem::path& path);

/// Renders the user message, byte-exact:
///
///   From the following outputs, make your selection:
///   [User Instruction]
///   <instruction>
///   [\User Instruction]
///   Option 1
///   <option 1 text>
///   ---
///   ...
///
/// Every option block is "Option k" followed by the option text and a "---"
/// separator line; k is 1-based in the given order. Throws Error on an empty
/// instruction, empty option list, or empty option text.
std::string render_user_message(const std::string& instruction,
                                const std::vector<std::string>& ordered_options);

/// Replaces the marker's placeholder with the given position.
std::string format_answer_marker(const std::string& answer_marker, int position);

}  // namespace gradescore
