#include "gradescore/prompting.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "gradescore/errors.hpp"

namespace gradescore {

namespace {

constexpr std::string_view kDefaultMarker = "Selection: <k>";

std::size_t placeholder_occurrences(const std::string& marker) {
  std::size_t count = 0;
  for (std::size_t pos = marker.find(kSelectionPlaceholder); pos != std::string::npos;
       pos = marker.find(kSelectionPlaceholder, pos + 1)) {
    ++count;
  }
  return count;
}

void check_template(const PromptTemplate& tmpl) {
  if (tmpl.template_id.empty()) throw ConfigError("prompt template: empty template_id");
  if (tmpl.system_text.empty()) {
    throw ConfigError("prompt template '" + tmpl.template_id + "': empty system_text");
  }
  if (placeholder_occurrences(tmpl.answer_marker) != 1) {
    throw ConfigError("prompt template '" + tmpl.template_id +
                      "': answer_marker must contain '<k>' exactly once");
  }
}

}  // namespace

std::vector<PromptTemplate> builtin_prompt_set() {
  const std::string ending =
      " End your reply with a line of the form `Selection: <k>`, where <k> is "
      "the number of the option you chose.";
  return {
      {"prompt1",
       "You are an impartial judge of candidate responses. Read the user's "
       "instruction and every option, select the single option that answers the "
       "instruction best, and then briefly explain why you chose it." +
           ending,
       std::string(kDefaultMarker)},
      {"prompt2",
       "You are an impartial judge of candidate responses. First write a short "
       "evaluation of each option against the user's instruction. Then, weighing "
       "those evaluations, select the single best option." +
           ending,
       std::string(kDefaultMarker)},
      {"prompt3",
       "You are an impartial judge of candidate responses. The order in which "
       "options appear carries no information about their quality: do not favor "
       "earlier or later options, judge content only. Select the single option "
       "that answers the user's instruction best." +
           ending,
       std::string(kDefaultMarker)},
      {"prompt4",
       "You are an impartial judge of candidate responses. Grade every option "
       "from 0 to 10 points for accuracy, helpfulness, and clarity, listing the "
       "points you assign. Then select the option with the highest total." +
           ending,
       std::string(kDefaultMarker)},
  };
}

std::vector<PromptTemplate> load_prompt_set(const std::filesystem::path& path) {
  std::ifstream input(path);
  if (!input) throw IoError("cannot read prompt set: " + path.string());

  std::vector<PromptTemplate> templates;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(input, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;

    const auto record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw ConfigError("prompt set line " + std::to_string(line_number) +
                        ": invalid JSON object");
    }

    PromptTemplate tmpl;
    tmpl.template_id = record.value("template_id", std::string());
    tmpl.system_text = record.value("system_text", std::string());
    tmpl.answer_marker = record.value("answer_marker", std::string(kDefaultMarker));
    check_template(tmpl);
    if (!ids.insert(tmpl.template_id).second) {
      throw ConfigError("prompt template '" + tmpl.template_id + "': duplicate id");
    }
    templates.push_back(std::move(tmpl));
  }
  if (templates.empty()) throw ConfigError("prompt set is empty: " + path.string());
  return templates;
}

std::string render_user_message(const std::string& instruction,
                                const std::vector<std::string>& ordered_options) {
  if (instruction.empty()) throw Error("empty instruction");
  if (ordered_options.empty()) throw Error("empty option set");

  std::string message;
  message.reserve(128 + instruction.size());
  message += "From the following outputs, make your selection:\n";
  message += "[User Instruction]\n";
  message += instruction;
  message += "\n[\\User Instruction]\n";
  for (std::size_t i = 0; i < ordered_options.size(); ++i) {
    if (ordered_options[i].empty()) {
      throw Error("empty option text at position " + std::to_string(i + 1));
    }
    message += "Option " + std::to_string(i + 1) + "\n";
    message += ordered_options[i];
    message += "\n---\n";
  }
  return message;
}

std::string format_answer_marker(const std::string& answer_marker, int position) {
  const std::size_t at = answer_marker.find(kSelectionPlaceholder);
  if (at == std::string::npos) {
    throw Error("answer marker lacks the '<k>' placeholder: " + answer_marker);
  }
  std::string formatted = answer_marker;
  formatted.replace(at, kSelectionPlaceholder.size(), std::to_string(position));
  return formatted;
}

}  // namespace gradescore
