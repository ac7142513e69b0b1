// gradescore: measures the order bias and choice stability of a
// multiple-choice judge by replaying each row's options under cyclic
// rotations and scoring the selections.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradescore/corpus.hpp"
#include "gradescore/errors.hpp"
#include "gradescore/judge.hpp"
#include "gradescore/prompting.hpp"
#include "gradescore/report.hpp"
#include "gradescore/rng.hpp"
#include "gradescore/runner.hpp"
#include "gradescore/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Settings {
  std::string dataset;
  std::string prompt = "prompt1";
  std::string prompt_set;
  std::string judge;
  std::string out;
  bool rand_option = false;
  bool force = false;
  int min_options = 2;
  int concurrency = 1;
  int retries = 2;
  int timeout_ms = 30000;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::string token_env = "JUDGE_API_TOKEN";
  std::vector<std::string> sweep_judges;
  std::vector<std::string> sweep_prompts;
  std::vector<bool> sweep_rand_options;
};

void apply_config_file(const std::string& path, Settings& settings) {
  std::ifstream input(path);
  if (!input) throw gradescore::ConfigError("cannot read config file: " + path);
  ordered_json doc;
  try {
    input >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw gradescore::ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw gradescore::ConfigError("config file must hold a JSON object");

  try {
    settings.dataset = doc.value("dataset", settings.dataset);
    settings.prompt = doc.value("prompt", settings.prompt);
    settings.prompt_set = doc.value("prompt_set", settings.prompt_set);
    settings.judge = doc.value("judge", settings.judge);
    settings.out = doc.value("out", settings.out);
    settings.rand_option = doc.value("rand_option", settings.rand_option);
    settings.force = doc.value("force", settings.force);
    settings.min_options = doc.value("min_options", settings.min_options);
    settings.concurrency = doc.value("concurrency", settings.concurrency);
    settings.retries = doc.value("retries", settings.retries);
    settings.timeout_ms = doc.value("timeout_ms", settings.timeout_ms);
    settings.temperature = doc.value("temperature", settings.temperature);
    settings.seed = doc.value("seed", settings.seed);
    settings.token_env = doc.value("token_env", settings.token_env);
    if (const auto sweep = doc.find("sweep"); sweep != doc.end()) {
      settings.sweep_judges =
          sweep->value("judges", std::vector<std::string>{});
      settings.sweep_prompts =
          sweep->value("prompts", std::vector<std::string>{});
      settings.sweep_rand_options = sweep->value("rand_options", std::vector<bool>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw gradescore::ConfigError("config file " + path + ": " + e.what());
  }
}

std::string iso8601_utc(std::chrono::system_clock::time_point when) {
  const std::time_t seconds = std::chrono::system_clock::to_time_t(when);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream input(path, std::ios::binary);
  std::ostringstream bytes;
  bytes << input.rdbuf();
  return bytes.str();
}

int run(const Settings& settings) {
  using namespace gradescore;

  if (settings.dataset.empty()) throw ConfigError("missing --dataset");
  if (settings.out.empty()) throw ConfigError("missing --out");
  if (!fs::exists(settings.dataset) || !fs::is_regular_file(settings.dataset)) {
    throw ConfigError("dataset not readable: " + settings.dataset);
  }

  const std::vector<PromptTemplate> templates =
      settings.prompt_set.empty() ? builtin_prompt_set()
                                  : load_prompt_set(settings.prompt_set);

  const std::vector<std::string> judges = settings.sweep_judges.empty()
                                              ? std::vector<std::string>{settings.judge}
                                              : settings.sweep_judges;
  const std::vector<std::string> prompts = settings.sweep_prompts.empty()
                                               ? std::vector<std::string>{settings.prompt}
                                               : settings.sweep_prompts;
  const std::vector<bool> rand_options =
      settings.sweep_rand_options.empty() ? std::vector<bool>{settings.rand_option}
                                          : settings.sweep_rand_options;
  if (judges.size() == 1 && judges.front().empty()) throw ConfigError("missing --judge");

  std::vector<TrialConfig> configs;
  for (const auto& judge_spec : judges) {
    JudgeConfig judge = parse_judge_spec(judge_spec);
    judge.temperature = settings.temperature;
    judge.timeout_ms = settings.timeout_ms;
    judge.token_env = settings.token_env;
    validate(judge);
    for (const auto& prompt : prompts) {
      for (bool rand_option : rand_options) {
        TrialConfig config;
        config.template_id = prompt;
        config.use_random_option = rand_option;
        config.min_options = settings.min_options;
        config.max_parse_retries = settings.retries;
        config.seed = settings.seed;
        config.concurrency = settings.concurrency;
        config.judge = judge;
        configs.push_back(std::move(config));
      }
    }
  }

  // Surface the --force conflict before any judge is queried.
  if (!settings.force) {
    for (const char* name : {"summary.csv", "rows.jsonl", "summary.md", "manifest.json"}) {
      const fs::path target = fs::path(settings.out) / name;
      if (fs::exists(target)) {
        throw ConfigError("output file exists (use --force to replace): " +
                          target.string());
      }
    }
  }

  const LoadedCorpus corpus = load_corpus(settings.dataset);
  for (const auto& reject : corpus.rejects) {
    std::fprintf(stderr, "warning: rejected corpus line %zu: %s\n", reject.line_number,
                 reject.reason.c_str());
  }

  RunManifest manifest;
  manifest.tool_version = std::string(kToolVersion);
  manifest.corpus_path = settings.dataset;
  manifest.corpus_rows = corpus.rows.size();
  manifest.seed = settings.seed;
  for (const auto& tmpl : templates) manifest.template_ids.push_back(tmpl.template_id);
  for (const auto& config : configs) {
    const std::string label = describe(config.judge);
    if (std::find(manifest.judges.begin(), manifest.judges.end(), label) ==
        manifest.judges.end()) {
      manifest.judges.push_back(label);
    }
  }

  ordered_json canonical;
  canonical["tool_version"] = manifest.tool_version;
  canonical["dataset_path"] = settings.dataset;
  canonical["dataset_fnv"] = fnv1a64(file_bytes(settings.dataset));
  ordered_json template_doc = ordered_json::array();
  for (const auto& tmpl : templates) {
    template_doc.push_back({{"template_id", tmpl.template_id},
                            {"system_text", tmpl.system_text},
                            {"answer_marker", tmpl.answer_marker}});
  }
  canonical["templates"] = std::move(template_doc);
  ordered_json cell_doc = ordered_json::array();
  for (const auto& config : configs) {
    cell_doc.push_back({{"judge", describe(config.judge)},
                        {"prompt", config.template_id},
                        {"rand_option", config.use_random_option},
                        {"min_options", config.min_options},
                        {"retries", config.max_parse_retries},
                        {"seed", config.seed},
                        {"temperature", config.judge.temperature},
                        {"timeout_ms", config.judge.timeout_ms}});
  }
  canonical["cells"] = std::move(cell_doc);
  manifest.config_digest = config_digest(canonical.dump());

  manifest.started_at = iso8601_utc(std::chrono::system_clock::now());
  const ExperimentReport report = run_experiment(corpus.rows, templates, configs);
  manifest.finished_at = iso8601_utc(std::chrono::system_clock::now());

  const ReportPaths paths = write_reports(report, manifest, settings.out, settings.force);

  for (const auto& cell : report.cells) {
    std::fprintf(stderr, "cell judge=%s prompt=%s rand_option=%s mean_grade=%s rows=%zu excluded=%zu\n",
                 cell.judge_label.c_str(), cell.template_id.c_str(),
                 cell.use_random_option ? "true" : "false",
                 cell.summary.mean_grade ? format_score(*cell.summary.mean_grade).c_str()
                                         : "n/a",
                 cell.summary.n_rows, cell.summary.n_excluded);
  }
  std::fprintf(stderr, "reports written: %s %s %s %s\n",
               paths.summary_csv.string().c_str(), paths.rows_jsonl.string().c_str(),
               paths.summary_md.string().c_str(), paths.manifest_json.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-bias and choice-stability harness for multiple-choice judges"};
  app.set_version_flag("--version", std::string(gradescore::kToolVersion));

  Settings flags;
  std::string config_path;
  app.add_option("--dataset", flags.dataset, "corpus file (one JSON row per line)");
  app.add_option("--prompt", flags.prompt, "template id (built-ins: prompt1..prompt4)");
  app.add_option("--prompt-set", flags.prompt_set, "prompt template file (JSONL)");
  app.add_option("--judge", flags.judge,
                 "judge spec: remote:<url>,<model> | mock:first | mock:fixed[:<option_id>]"
                 " | mock:uniform | mock:weights:<w1,...>");
  app.add_flag("--rand-option", flags.rand_option,
               "add one unrelated option sampled from another row");
  app.add_option("--min-options", flags.min_options, "minimum options per trial (>= 2)");
  app.add_option("--seed", flags.seed, "seed for distractor sampling and mock judges");
  app.add_option("--concurrency", flags.concurrency, "rows in flight");
  app.add_option("--retries", flags.retries, "re-queries per round on unparseable replies");
  app.add_option("--out", flags.out, "output directory for reports");
  app.add_flag("--force", flags.force, "replace existing report files");
  app.add_option("--config", config_path, "JSON config file; flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Settings settings;
    if (!config_path.empty()) apply_config_file(config_path, settings);

    const auto given = [&](const std::string& name) { return app.count(name) > 0; };
    if (given("--dataset")) settings.dataset = flags.dataset;
    if (given("--prompt")) settings.prompt = flags.prompt;
    if (given("--prompt-set")) settings.prompt_set = flags.prompt_set;
    if (given("--judge")) settings.judge = flags.judge;
    if (given("--out")) settings.out = flags.out;
    if (given("--rand-option")) settings.rand_option = flags.rand_option;
    if (given("--force")) settings.force = flags.force;
    if (given("--min-options")) settings.min_options = flags.min_options;
    if (given("--seed")) settings.seed = flags.seed;
    if (given("--concurrency")) settings.concurrency = flags.concurrency;
    if (given("--retries")) settings.retries = flags.retries;

    // A --judge or --prompt flag narrows a sweep back down to one cell.
    if (given("--judge")) settings.sweep_judges.clear();
    if (given("--prompt")) settings.sweep_prompts.clear();
    if (given("--rand-option")) settings.sweep_rand_options.clear();

    return run(settings);
  } catch (const gradescore::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
