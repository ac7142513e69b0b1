#include "gradescore/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gradescore/errors.hpp"
#include "gradescore/permutation.hpp"

namespace gradescore {

namespace {

void validate_trial(const TrialConfig& config) {
  if (config.min_options < 2) throw ConfigError("min_options must be at least 2");
  if (config.max_parse_retries < 0) throw ConfigError("max_parse_retries must be >= 0");
  if (config.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  validate(config.judge);
}

// Distractor id that cannot collide with the row's own option ids.
std::string distractor_id(const CorpusRow& row) {
  std::string id = "__unrelated__";
  const auto taken = [&](const std::string& candidate) {
    return std::any_of(row.options.begin(), row.options.end(),
                       [&](const CandidateOption& o) { return o.option_id == candidate; });
  };
  while (taken(id)) id += '_';
  return id;
}

const PromptTemplate& find_template(const std::vector<PromptTemplate>& templates,
                                    const std::string& template_id) {
  const auto it = std::find_if(
      templates.begin(), templates.end(),
      [&](const PromptTemplate& t) { return t.template_id == template_id; });
  if (it == templates.end()) throw ConfigError("unknown template id: " + template_id);
  return *it;
}

}  // namespace

int effective_min_options(const TrialConfig& config) {
  return config.use_random_option ? config.min_options - 1 : config.min_options;
}

RowResult run_row(const CorpusRow& row, const PromptTemplate& tmpl,
                  const TrialConfig& config, const std::vector<CorpusRow>& corpus,
                  Rng& rng, const Judge& judge) {
  validate_trial(config);

  RowResult result;
  result.row_id = row.row_id;

  std::vector<std::string> ids;
  std::vector<std::string> texts;
  ids.reserve(row.options.size() + 1);
  texts.reserve(row.options.size() + 1);
  for (const auto& option : row.options) {
    ids.push_back(option.option_id);
    texts.push_back(option.text);
  }

  if (config.use_random_option) {
    SampledDistractor distractor;
    try {
      distractor = sample_unrelated(corpus, row.row_id, rng);
    } catch (const Error& e) {
      result.excluded = true;
      result.exclusion_reason = e.what();
      return result;
    }
    ids.push_back(distractor_id(row));
    texts.push_back(std::move(distractor.text));
    result.distractor_source = std::move(distractor.source_row_id);
  }

  if (ids.size() < static_cast<std::size_t>(config.min_options)) {
    throw Error("row " + row.row_id + " has fewer than min_options options");
  }

  const PermutationPlan plan = cyclic_permutations(ids);
  const int n = static_cast<int>(ids.size());
  result.trace.n_options = n;

  std::vector<std::string> ordered_texts(ids.size());
  for (std::size_t rotation_index = 0; rotation_index < plan.rotations.size();
       ++rotation_index) {
    const auto& rotation = plan.rotations[rotation_index];
    for (std::size_t p = 0; p < rotation.size(); ++p) {
      const auto at = std::find(ids.begin(), ids.end(), rotation[p]) - ids.begin();
      ordered_texts[p] = texts[static_cast<std::size_t>(at)];
    }

    RenderedPrompt prompt;
    prompt.system_text = tmpl.system_text;
    prompt.user_text = render_user_message(row.instruction, ordered_texts);
    prompt.n_options = n;
    prompt.option_order = rotation;

    std::optional<JudgeVerdict> verdict;
    const int max_attempts = 1 + config.max_parse_retries;
    for (int attempt = 1; attempt <= max_attempts && !verdict; ++attempt) {
      try {
        verdict = query_and_parse(judge, prompt, tmpl.answer_marker, attempt, rng);
      } catch (const TransportError& e) {
        result.excluded = true;
        result.exclusion_reason = "transport error at rotation " +
                                  std::to_string(rotation_index) + ": " + e.what();
        return result;
      } catch (const ParseError&) {
        if (attempt == max_attempts) {
          result.excluded = true;
          result.exclusion_reason =
              "unparseable verdict at rotation " + std::to_string(rotation_index);
          return result;
        }
      }
    }

    const std::string& selected_id =
        rotation[static_cast<std::size_t>(verdict->parsed_position - 1)];
    result.per_round.push_back({static_cast<int>(rotation_index), verdict->parsed_position,
                                selected_id, verdict->attempt});
    ++result.trace.position_counts[verdict->parsed_position];
    ++result.trace.option_counts[selected_id];
    ++result.trace.total_rounds;
  }

  result.scores = score_trial(result.trace);
  return result;
}

RowResult run_row(const CorpusRow& row, const PromptTemplate& tmpl,
                  const TrialConfig& config, const std::vector<CorpusRow>& corpus,
                  Rng& rng) {
  const auto judge = make_judge(config.judge);
  return run_row(row, tmpl, config, corpus, rng, *judge);
}

ExperimentReport run_experiment(const std::vector<CorpusRow>& corpus,
                                const std::vector<PromptTemplate>& templates,
                                const std::vector<TrialConfig>& configs) {
  if (configs.empty()) throw ConfigError("no trial configurations");

  ExperimentReport report;
  for (const auto& config : configs) {
    validate_trial(config);
    const PromptTemplate& tmpl = find_template(templates, config.template_id);

    const std::size_t needed = static_cast<std::size_t>(effective_min_options(config));
    std::vector<const CorpusRow*> eligible;
    eligible.reserve(corpus.size());
    for (const auto& row : corpus) {
      if (row.options.size() >= needed) eligible.push_back(&row);
    }
    if (eligible.empty()) throw Error("empty experiment");

    const auto judge = make_judge(config.judge);
    std::vector<RowResult> results(eligible.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
      for (;;) {
        const std::size_t index = next.fetch_add(1);
        if (index >= eligible.size()) return;
        try {
          Rng rng = derive_rng(config.seed, eligible[index]->row_id);
          results[index] = run_row(*eligible[index], tmpl, config, corpus, rng, *judge);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };

    const std::size_t lanes =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), eligible.size());
    if (lanes <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(lanes);
      for (std::size_t i = 0; i < lanes; ++i) pool.emplace_back(worker);
      for (auto& thread : pool) thread.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ScoreBreakdown> included;
    included.reserve(results.size());
    std::size_t excluded = 0;
    for (const auto& row_result : results) {
      if (row_result.excluded) {
        ++excluded;
      } else {
        included.push_back(*row_result.scores);
      }
    }

    CellResult cell;
    cell.judge_label = describe(config.judge);
    cell.template_id = tmpl.template_id;
    cell.use_random_option = config.use_random_option;
    cell.summary = aggregate(included, excluded);
    cell.rows = std::move(results);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace gradescore
