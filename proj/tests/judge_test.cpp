#include "gradescore/judge.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradescore/errors.hpp"
#include "stub_server.hpp"

namespace gradescore {
namespace {

using testsupport::StubChatServer;

RenderedPrompt prompt_with_order(std::vector<std::string> order) {
  RenderedPrompt prompt;
  prompt.system_text = "system";
  prompt.user_text = "user";
  prompt.n_options = static_cast<int>(order.size());
  prompt.option_order = std::move(order);
  return prompt;
}

constexpr const char* kMarker = "Selection: <k>";

// ---------------------------------------------------------------------------
// parse_selection
// ---------------------------------------------------------------------------

TEST(ParseSelection, MarkerMatchWins) {
  EXPECT_EQ(parse_selection("I pick Option 2 because...\nSelection: 2", 3, kMarker), 2);
}

TEST(ParseSelection, FallbackToLastInRangeOptionMention) {
  EXPECT_EQ(parse_selection("The best is Option 3.", 4, kMarker), 3);
  EXPECT_EQ(parse_selection("Option 1 is weak. Option 12 is absent. Option 3 wins.", 4,
                            kMarker),
            3);
}

TEST(ParseSelection, OutOfRangeMarkerIsParseError) {
  EXPECT_THROW(parse_selection("Selection: 9", 4, kMarker), ParseError);
  EXPECT_THROW(parse_selection("Selection: 0", 4, kMarker), ParseError);
  EXPECT_THROW(parse_selection("Selection: 99999999999999999999999", 4, kMarker),
               ParseError);
}

TEST(ParseSelection, LastMarkerOccurrenceWins) {
  EXPECT_EQ(parse_selection("Selection: 1\nOn reflection...\nSelection: 2", 3, kMarker), 2);
}

TEST(ParseSelection, NoSelectionIsParseError) {
  EXPECT_THROW(parse_selection("I cannot decide.", 3, kMarker), ParseError);
  EXPECT_THROW(parse_selection("Options 2 looks nice", 3, kMarker), ParseError);
}

TEST(ParseSelection, MarkerWithRegexSpecialsIsEscaped) {
  EXPECT_EQ(parse_selection("FINAL [4] (done)", 5, "FINAL [<k>] (done)"), 4);
}

TEST(ParseSelection, WordBoundaryGuardsOptionMention) {
  EXPECT_THROW(parse_selection("suboption 2", 3, kMarker), ParseError);
}

// ---------------------------------------------------------------------------
// Mocks
// ---------------------------------------------------------------------------

TEST(MockJudges, FirstPositionAlwaysSelectsOne) {
  const auto judge = make_judge({.kind = JudgeKind::mock_first_position});
  Rng rng(1);
  const auto raw = judge->query(prompt_with_order({"a", "b", "c", "d"}), kMarker, rng);
  EXPECT_NE(raw.find("Selection: 1"), std::string::npos);
}

TEST(MockJudges, FixedContentFollowsTargetAcrossRotations) {
  JudgeConfig config;
  config.kind = JudgeKind::mock_fixed_content;
  config.fixed_target = "B";
  const auto judge = make_judge(config);
  Rng rng(1);
  EXPECT_EQ(judge->query(prompt_with_order({"A", "C", "B"}), kMarker, rng), "Selection: 3");
  EXPECT_EQ(judge->query(prompt_with_order({"B", "A", "C"}), kMarker, rng), "Selection: 1");
}

TEST(MockJudges, FixedContentDefaultsToSmallestId) {
  JudgeConfig config;
  config.kind = JudgeKind::mock_fixed_content;
  const auto judge = make_judge(config);
  Rng rng(1);
  EXPECT_EQ(judge->query(prompt_with_order({"c", "a", "b"}), kMarker, rng), "Selection: 2");
}

TEST(MockJudges, FixedContentMissingTargetThrows) {
  JudgeConfig config;
  config.kind = JudgeKind::mock_fixed_content;
  config.fixed_target = "Z";
  const auto judge = make_judge(config);
  Rng rng(1);
  EXPECT_THROW(judge->query(prompt_with_order({"a", "b"}), kMarker, rng), Error);
}

TEST(MockJudges, WeightLengthMismatchThrows) {
  JudgeConfig config;
  config.kind = JudgeKind::mock_positional_weights;
  config.weights = {1.0, 2.0};
  const auto judge = make_judge(config);
  Rng rng(1);
  EXPECT_THROW(judge->query(prompt_with_order({"a", "b", "c"}), kMarker, rng), Error);
}

// parse_selection(query(mock, ...)) recovers the mock's internal choice for
// every mock kind and option count.
TEST(MockJudges, QueryParseRoundTrip) {
  for (int n = 2; n <= 8; ++n) {
    std::vector<std::string> order;
    for (int i = 0; i < n; ++i) order.push_back("opt" + std::to_string(i));
    const auto prompt = prompt_with_order(order);

    std::vector<JudgeConfig> configs;
    configs.push_back({.kind = JudgeKind::mock_first_position});
    {
      JudgeConfig fixed;
      fixed.kind = JudgeKind::mock_fixed_content;
      fixed.fixed_target = order[static_cast<std::size_t>(n / 2)];
      configs.push_back(fixed);
    }
    configs.push_back({.kind = JudgeKind::mock_uniform_random});
    {
      JudgeConfig weighted;
      weighted.kind = JudgeKind::mock_positional_weights;
      for (int i = 0; i < n; ++i) weighted.weights.push_back(1.0 + i);
      configs.push_back(weighted);
    }

    for (const auto& config : configs) {
      const auto judge = make_judge(config);
      Rng rng(static_cast<std::uint64_t>(n) * 1000);
      Rng replay(static_cast<std::uint64_t>(n) * 1000);
      for (int round = 0; round < 50; ++round) {
        const auto raw = judge->query(prompt, kMarker, rng);
        const int parsed = parse_selection(raw, n, kMarker);
        EXPECT_GE(parsed, 1);
        EXPECT_LE(parsed, n);
        switch (config.kind) {
          case JudgeKind::mock_first_position:
            EXPECT_EQ(parsed, 1);
            break;
          case JudgeKind::mock_fixed_content:
            EXPECT_EQ(parsed, n / 2 + 1);
            break;
          case JudgeKind::mock_uniform_random:
            EXPECT_EQ(parsed,
                      static_cast<int>(uniform_index(replay, order.size())) + 1);
            break;
          case JudgeKind::mock_positional_weights:
            EXPECT_EQ(parsed, choose_weighted_position(config.weights, replay));
            break;
          default:
            FAIL();
        }
      }
    }
  }
}

TEST(WeightedChoice, NearDegenerateWeightsPinFirstPosition) {
  const std::vector<double> weights = {1.0, 1e-6, 1e-6};
  Rng rng(7);
  int first = 0;
  for (int i = 0; i < 10000; ++i) {
    if (choose_weighted_position(weights, rng) == 1) ++first;
  }
  EXPECT_GE(first, 9990);
}

TEST(WeightedChoice, UniformWeightsWithinThreeSigma) {
  const std::vector<double> weights = {1.0, 1.0, 1.0, 1.0};
  Rng rng(11);
  std::map<int, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[choose_weighted_position(weights, rng)];
  const double expected = draws * 0.25;
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  for (int position = 1; position <= 4; ++position) {
    EXPECT_NEAR(counts[position], expected, 3.0 * sigma) << "position " << position;
  }
}

// Two draws from weights [3,1] form one trace; E[llm_score] = 0.375 by
// enumerating the four outcome pairs: P(1,1)=9/16 and P(2,2)=1/16 give
// entropy 0, the two mixed pairs (3/16 each) give entropy 1.
TEST(WeightedChoice, TwoRoundTraceExpectationMatchesEnumeration) {
  const std::vector<double> weights = {3.0, 1.0};
  const double expected = 6.0 / 16.0;
  Rng rng(13);
  const int rows = 5000;
  double llm_sum = 0.0;
  for (int i = 0; i < rows; ++i) {
    const int a = choose_weighted_position(weights, rng);
    const int b = choose_weighted_position(weights, rng);
    llm_sum += (a == b) ? 0.0 : 1.0;
  }
  // sd of a Bernoulli(6/16) outcome: sqrt(p(1-p)) ~= 0.4841
  const double three_se = 3.0 * std::sqrt(expected * (1.0 - expected) / rows);
  EXPECT_NEAR(llm_sum / rows, expected, three_se);
}

// ---------------------------------------------------------------------------
// Judge spec strings
// ---------------------------------------------------------------------------

TEST(JudgeSpec, ParsesAllForms) {
  EXPECT_EQ(parse_judge_spec("mock:first").kind, JudgeKind::mock_first_position);
  EXPECT_EQ(parse_judge_spec("mock:uniform").kind, JudgeKind::mock_uniform_random);

  const auto fixed = parse_judge_spec("mock:fixed:optB");
  EXPECT_EQ(fixed.kind, JudgeKind::mock_fixed_content);
  EXPECT_EQ(fixed.fixed_target, "optB");
  EXPECT_TRUE(parse_judge_spec("mock:fixed").fixed_target.empty());

  const auto weighted = parse_judge_spec("mock:weights:3,1,0.5");
  EXPECT_EQ(weighted.kind, JudgeKind::mock_positional_weights);
  EXPECT_EQ(weighted.weights, (std::vector<double>{3.0, 1.0, 0.5}));

  const auto remote = parse_judge_spec("remote:http://localhost:8080/v1,my-model");
  EXPECT_EQ(remote.kind, JudgeKind::remote_chat);
  EXPECT_EQ(*remote.endpoint_url, "http://localhost:8080/v1");
  EXPECT_EQ(*remote.model_name, "my-model");
}

TEST(JudgeSpec, RejectsUnknownForms) {
  EXPECT_THROW(parse_judge_spec("mock:psychic"), ConfigError);
  EXPECT_THROW(parse_judge_spec("remote:justaurl"), ConfigError);
  EXPECT_THROW(parse_judge_spec("mock:weights:1,abc"), ConfigError);
  EXPECT_THROW(parse_judge_spec(""), ConfigError);
}

TEST(JudgeSpec, DescribeRoundTrips) {
  for (const char* spec :
       {"mock:first", "mock:uniform", "mock:fixed", "mock:fixed:optB",
        "mock:weights:3,1,0.5", "remote:http://h:1/v1,model-x"}) {
    EXPECT_EQ(describe(parse_judge_spec(spec)), spec);
  }
}

TEST(JudgeSpec, ValidateEnforcesInvariants) {
  JudgeConfig weighted;
  weighted.kind = JudgeKind::mock_positional_weights;
  weighted.weights = {1.0, -2.0};
  EXPECT_THROW(validate(weighted), ConfigError);
  weighted.weights.clear();
  EXPECT_THROW(validate(weighted), ConfigError);

  JudgeConfig remote;
  remote.kind = JudgeKind::remote_chat;
  EXPECT_THROW(validate(remote), ConfigError);
  remote.endpoint_url = "http://h:1";
  EXPECT_THROW(validate(remote), ConfigError);
  remote.model_name = "m";
  EXPECT_NO_THROW(validate(remote));
  remote.timeout_ms = 0;
  EXPECT_THROW(validate(remote), ConfigError);
}

// ---------------------------------------------------------------------------
// Remote adapter against the stub server
// ---------------------------------------------------------------------------

JudgeConfig remote_config(const std::string& url) {
  JudgeConfig config;
  config.kind = JudgeKind::remote_chat;
  config.endpoint_url = url;
  config.model_name = "stub-model";
  config.timeout_ms = 5000;
  return config;
}

TEST(RemoteChatJudge, ReturnsCompletionContentVerbatim) {
  auto server = StubChatServer::with_content(
      [](const nlohmann::json&) { return "Anything goes.\nSelection: 2"; });
  const auto judge = make_judge(remote_config(server.url()));
  Rng rng(1);
  const auto raw = judge->query(prompt_with_order({"a", "b", "c"}), kMarker, rng);
  EXPECT_EQ(raw, "Anything goes.\nSelection: 2");
  EXPECT_EQ(parse_selection(raw, 3, kMarker), 2);
}

TEST(RemoteChatJudge, SendsChatCompletionsWireFormat) {
  setenv("GS_TEST_TOKEN", "sekrit", 1);
  auto server = StubChatServer::with_content([](const nlohmann::json&) {
    return "Selection: 1";
  });
  auto config = remote_config(server.url());
  config.token_env = "GS_TEST_TOKEN";
  config.temperature = 0.25;
  const auto judge = make_judge(config);

  RenderedPrompt prompt = prompt_with_order({"a", "b"});
  prompt.system_text = "be a judge";
  prompt.user_text = "pick one";
  Rng rng(1);
  judge->query(prompt, kMarker, rng);

  const auto requests = server.requests();
  ASSERT_EQ(requests.size(), 1u);
  EXPECT_EQ(requests[0].authorization, "Bearer sekrit");
  const auto body = nlohmann::json::parse(requests[0].body);
  EXPECT_EQ(body.at("model"), "stub-model");
  EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.25);
  ASSERT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body.at("messages")[0].at("role"), "system");
  EXPECT_EQ(body.at("messages")[0].at("content"), "be a judge");
  EXPECT_EQ(body.at("messages")[1].at("role"), "user");
  EXPECT_EQ(body.at("messages")[1].at("content"), "pick one");
  unsetenv("GS_TEST_TOKEN");
}

TEST(RemoteChatJudge, BasePathIsPreserved) {
  auto server = StubChatServer([](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
  });
  // The stub only serves /chat/completions, so /v1/chat/completions 404s.
  const auto judge = make_judge(remote_config(server.url() + "/v1"));
  Rng rng(1);
  try {
    judge->query(prompt_with_order({"a", "b"}), kMarker, rng);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(RemoteChatJudge, NonSuccessStatusIsTransportError) {
  auto server = StubChatServer([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("overloaded", "text/plain");
  });
  const auto judge = make_judge(remote_config(server.url()));
  Rng rng(1);
  try {
    judge->query(prompt_with_order({"a", "b"}), kMarker, rng);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 500);
  }
}

TEST(RemoteChatJudge, ConnectionFailureIsTransportErrorWithoutStatus) {
  auto config = remote_config("http://127.0.0.1:1");
  config.timeout_ms = 500;
  const auto judge = make_judge(config);
  Rng rng(1);
  try {
    judge->query(prompt_with_order({"a", "b"}), kMarker, rng);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 0);
  }
}

TEST(RemoteChatJudge, EmptyCompletionIsEmptyReply) {
  auto server = StubChatServer::with_content([](const nlohmann::json&) { return ""; });
  const auto judge = make_judge(remote_config(server.url()));
  Rng rng(1);
  try {
    judge->query(prompt_with_order({"a", "b"}), kMarker, rng);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "empty reply");
  }
}

TEST(RemoteChatJudge, MalformedCompletionIsParseError) {
  auto server = StubChatServer([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\":[]}", "application/json");
  });
  const auto judge = make_judge(remote_config(server.url()));
  Rng rng(1);
  EXPECT_THROW(judge->query(prompt_with_order({"a", "b"}), kMarker, rng), ParseError);
}

TEST(QueryAndParse, FillsVerdictFields) {
  const auto judge = make_judge({.kind = JudgeKind::mock_first_position});
  Rng rng(1);
  const auto verdict = query_and_parse(*judge, prompt_with_order({"a", "b"}), kMarker, 3, rng);
  EXPECT_EQ(verdict.parsed_position, 1);
  EXPECT_EQ(verdict.attempt, 3);
  EXPECT_GE(verdict.latency_ms, 0);
  EXPECT_EQ(verdict.raw_text, "Selection: 1");
}

}  // namespace
}  // namespace gradescore
