#include "gradescore/judge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "gradescore/errors.hpp"

namespace gradescore {

namespace {

std::string format_weight(double w) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", w);
  return buffer;
}

std::vector<double> parse_weight_list(const std::string& text) {
  std::vector<double> weights;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      const double w = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      weights.push_back(w);
    } catch (const std::exception&) {
      throw ConfigError("judge spec: bad weight '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return weights;
}

// "http://host:port/base" -> {"http://host:port", "/base"}
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint URL needs a scheme: " + url);
  }
  const std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string base_path = url.substr(path);
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
  return {url.substr(0, path), base_path};
}

std::regex marker_regex(const std::string& answer_marker) {
  const std::size_t at = answer_marker.find(kSelectionPlaceholder);
  if (at == std::string::npos) {
    throw Error("answer marker lacks the '<k>' placeholder: " + answer_marker);
  }
  static const std::regex escape(R"([.^$|()\[\]{}*+?\\])");
  const auto quote = [&](const std::string& text) {
    return std::regex_replace(text, escape, R"(\$&)");
  };
  const std::string pattern = quote(answer_marker.substr(0, at)) + "([0-9]+)" +
                              quote(answer_marker.substr(at + kSelectionPlaceholder.size()));
  return std::regex(pattern);
}

std::optional<long long> to_number(const std::string& digits) {
  try {
    return std::stoll(digits);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

class MockFirstPosition final : public Judge {
 public:
  std::string query(const RenderedPrompt&, const std::string& answer_marker,
                    Rng&) const override {
    return format_answer_marker(answer_marker, 1);
  }
};

class MockFixedContent final : public Judge {
 public:
  explicit MockFixedContent(std::string target) : target_(std::move(target)) {}

  std::string query(const RenderedPrompt& prompt, const std::string& answer_marker,
                    Rng&) const override {
    const auto& order = prompt.option_order;
    std::size_t position;
    if (target_.empty()) {
      position = std::min_element(order.begin(), order.end()) - order.begin();
    } else {
      const auto it = std::find(order.begin(), order.end(), target_);
      if (it == order.end()) {
        throw Error("fixed target not in option set: " + target_);
      }
      position = static_cast<std::size_t>(it - order.begin());
    }
    return format_answer_marker(answer_marker, static_cast<int>(position) + 1);
  }

 private:
  std::string target_;
};

class MockUniformRandom final : public Judge {
 public:
  std::string query(const RenderedPrompt& prompt, const std::string& answer_marker,
                    Rng& rng) const override {
    const int position = static_cast<int>(uniform_index(rng, prompt.option_order.size())) + 1;
    return format_answer_marker(answer_marker, position);
  }
};

class MockPositionalWeights final : public Judge {
 public:
  explicit MockPositionalWeights(std::vector<double> weights)
      : weights_(std::move(weights)) {}

  std::string query(const RenderedPrompt& prompt, const std::string& answer_marker,
                    Rng& rng) const override {
    if (weights_.size() != prompt.option_order.size()) {
      throw Error("weight vector length " + std::to_string(weights_.size()) +
                  " does not match option count " +
                  std::to_string(prompt.option_order.size()));
    }
    return format_answer_marker(answer_marker, choose_weighted_position(weights_, rng));
  }

 private:
  std::vector<double> weights_;
};

class RemoteChatJudge final : public Judge {
 public:
  explicit RemoteChatJudge(const JudgeConfig& config)
      : model_(*config.model_name),
        temperature_(config.temperature),
        timeout_ms_(config.timeout_ms),
        token_env_(config.token_env) {
    std::tie(base_url_, base_path_) = split_endpoint(*config.endpoint_url);
  }

  // One POST, no internal retries; retry policy belongs to the runner.
  std::string query(const RenderedPrompt& prompt, const std::string&,
                    Rng&) const override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::milliseconds(timeout_ms_));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms_));
    client.set_write_timeout(std::chrono::milliseconds(timeout_ms_));

    httplib::Headers headers;
    if (!token_env_.empty()) {
      if (const char* token = std::getenv(token_env_.c_str()); token && *token) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }

    const nlohmann::json body = {
        {"model", model_},
        {"messages",
         {{{"role", "system"}, {"content", prompt.system_text}},
          {{"role", "user"}, {"content", prompt.user_text}}}},
        {"temperature", temperature_},
    };

    auto result = client.Post(base_path_ + "/chat/completions", headers, body.dump(),
                              "application/json");
    if (!result) {
      throw TransportError("chat request failed: " + httplib::to_string(result.error()), 0);
    }
    if (result->status < 200 || result->status >= 300) {
      throw TransportError("chat endpoint returned status " + std::to_string(result->status),
                           result->status);
    }

    const auto reply = nlohmann::json::parse(result->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) {
      throw ParseError("malformed completion response");
    }
    std::string text;
    try {
      text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError("malformed completion response");
    }
    if (text.empty()) throw ParseError("empty reply");
    return text;
  }

 private:
  std::string base_url_;
  std::string base_path_;
  std::string model_;
  double temperature_;
  int timeout_ms_;
  std::string token_env_;
};

}  // namespace

JudgeConfig parse_judge_spec(const std::string& spec) {
  JudgeConfig config;
  if (spec.rfind("remote:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const std::size_t comma = rest.rfind(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == rest.size()) {
      throw ConfigError("judge spec 'remote:' needs <url>,<model>: " + spec);
    }
    config.kind = JudgeKind::remote_chat;
    config.endpoint_url = rest.substr(0, comma);
    config.model_name = rest.substr(comma + 1);
    return config;
  }
  if (spec == "mock:first") {
    config.kind = JudgeKind::mock_first_position;
    return config;
  }
  if (spec == "mock:fixed" || spec.rfind("mock:fixed:", 0) == 0) {
    config.kind = JudgeKind::mock_fixed_content;
    if (spec.size() > 11) config.fixed_target = spec.substr(11);
    return config;
  }
  if (spec == "mock:uniform") {
    config.kind = JudgeKind::mock_uniform_random;
    return config;
  }
  if (spec.rfind("mock:weights:", 0) == 0) {
    config.kind = JudgeKind::mock_positional_weights;
    config.weights = parse_weight_list(spec.substr(13));
    return config;
  }
  throw ConfigError("unrecognized judge spec: " + spec);
}

std::string describe(const JudgeConfig& config) {
  switch (config.kind) {
    case JudgeKind::remote_chat:
      return "remote:" + config.endpoint_url.value_or("") + "," +
             config.model_name.value_or("");
    case JudgeKind::mock_first_position:
      return "mock:first";
    case JudgeKind::mock_fixed_content:
      return config.fixed_target.empty() ? "mock:fixed" : "mock:fixed:" + config.fixed_target;
    case JudgeKind::mock_uniform_random:
      return "mock:uniform";
    case JudgeKind::mock_positional_weights: {
      std::string label = "mock:weights:";
      for (std::size_t i = 0; i < config.weights.size(); ++i) {
        if (i != 0) label += ',';
        label += format_weight(config.weights[i]);
      }
      return label;
    }
  }
  throw Error("describe: unknown judge kind");
}

void validate(const JudgeConfig& config) {
  if (config.timeout_ms <= 0) throw ConfigError("judge timeout must be positive");
  if (config.temperature < 0.0) throw ConfigError("judge temperature must be >= 0");
  switch (config.kind) {
    case JudgeKind::remote_chat:
      if (!config.endpoint_url || config.endpoint_url->empty() || !config.model_name ||
          config.model_name->empty()) {
        throw ConfigError("remote judge needs endpoint_url and model_name");
      }
      split_endpoint(*config.endpoint_url);
      break;
    case JudgeKind::mock_positional_weights:
      if (config.weights.empty()) throw ConfigError("weighted mock needs a weight vector");
      for (double w : config.weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
          throw ConfigError("weighted mock needs positive finite weights");
        }
      }
      break;
    default:
      break;
  }
}

std::unique_ptr<Judge> make_judge(const JudgeConfig& config) {
  validate(config);
  switch (config.kind) {
    case JudgeKind::remote_chat:
      return std::make_unique<RemoteChatJudge>(config);
    case JudgeKind::mock_first_position:
      return std::make_unique<MockFirstPosition>();
    case JudgeKind::mock_fixed_content:
      return std::make_unique<MockFixedContent>(config.fixed_target);
    case JudgeKind::mock_uniform_random:
      return std::make_unique<MockUniformRandom>();
    case JudgeKind::mock_positional_weights:
      return std::make_unique<MockPositionalWeights>(config.weights);
  }
  throw Error("make_judge: unknown judge kind");
}

int parse_selection(const std::string& raw_text, int n_options,
                    const std::string& answer_marker) {
  if (n_options < 1) throw Error("parse_selection: option count must be positive");

  // Marker matches win; the last one is the judge's final word.
  const std::regex marker = marker_regex(answer_marker);
  std::optional<std::string> marker_digits;
  for (auto it = std::sregex_iterator(raw_text.begin(), raw_text.end(), marker);
       it != std::sregex_iterator(); ++it) {
    marker_digits = (*it)[1].str();
  }
  if (marker_digits) {
    const auto value = to_number(*marker_digits);
    if (!value || *value < 1 || *value > n_options) {
      throw ParseError("selection out of range: " + *marker_digits);
    }
    return static_cast<int>(*value);
  }

  // Fallback: the last in-range "Option k" mention.
  static const std::regex option_mention(R"(\bOption[ \t]+([0-9]+))");
  std::optional<int> fallback;
  for (auto it = std::sregex_iterator(raw_text.begin(), raw_text.end(), option_mention);
       it != std::sregex_iterator(); ++it) {
    const auto value = to_number((*it)[1].str());
    if (value && *value >= 1 && *value <= n_options) {
      fallback = static_cast<int>(*value);
    }
  }
  if (fallback) return *fallback;
  throw ParseError("no selection found in judge reply");
}

int choose_weighted_position(std::span<const double> weights, Rng& rng) {
  return static_cast<int>(weighted_index(rng, weights)) + 1;
}

JudgeVerdict query_and_parse(const Judge& judge, const RenderedPrompt& prompt,
                             const std::string& answer_marker, int attempt, Rng& rng) {
  const auto started = std::chrono::steady_clock::now();
  JudgeVerdict verdict;
  verdict.attempt = attempt;
  verdict.raw_text = judge.query(prompt, answer_marker, rng);
  verdict.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  verdict.parsed_position = parse_selection(verdict.raw_text, prompt.n_options, answer_marker);
  return verdict;
}

}  // namespace gradescore
