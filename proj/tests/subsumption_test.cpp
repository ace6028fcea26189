// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/errors.hpp"
#include "deltacheck/llm_gateway.hpp"
#include "deltacheck/subsumption.hpp"
#include "support/fuzz.hpp"
#include "support/oracles.hpp"
#include "support/script_server.hpp"

namespace deltacheck {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::Rng;

const fs::path kMovie = fs::path(DELTACHECK_FIXTURES) / "movie";

AssertionSpec parse(const json& doc) { return spec_from_json(doc); }

TEST(DslRules, JsonListImpliesParseableList) {
  const auto min_two = parse({{"kind", "json_list_min_len"}, {"min", 2}});
  const auto list = parse({{"kind", "json_parseable"}, {"shape", "list"}});
  EXPECT_TRUE(dsl_subsumes(min_two, list));
  EXPECT_FALSE(dsl_subsumes(list, min_two));
  EXPECT_FALSE(dsl_subsumes(min_two, parse({{"kind", "json_parseable"}, {"shape", "object"}})));
}

TEST(DslRules, Examples) {
  const auto w100 = parse({{"kind", "word_count"}, {"max", 100}});
  const auto w50 = parse({{"kind", "word_count"}, {"min", 10}, {"max", 50}});
  EXPECT_TRUE(dsl_subsumes(w50, w100));
  EXPECT_FALSE(dsl_subsumes(w100, w50));
  EXPECT_FALSE(dsl_subsumes(w50, parse({{"kind", "sentence_count"}, {"max", 100}})));
  const auto ab = parse({{"kind", "contains_all"}, {"values", {"a", "b"}}});
  const auto a = parse({{"kind", "contains_all"}, {"values", {"a"}}});
  EXPECT_TRUE(dsl_subsumes(ab, a));
  EXPECT_FALSE(dsl_subsumes(a, ab));
  const auto keys = parse({{"kind", "json_required_keys"}, {"keys", {"x", "y"}}});
  EXPECT_TRUE(dsl_subsumes(keys, parse({{"kind", "json_required_keys"}, {"keys", {"y"}}})));
  EXPECT_TRUE(dsl_subsumes(keys, parse({{"kind", "json_parseable"}})));
  const auto both = parse({{"kind", "all_of"}, {"children", {spec_to_json(w50), spec_to_json(a)}}});
  EXPECT_TRUE(dsl_subsumes(both, w100));
  EXPECT_TRUE(dsl_subsumes(both, a));
  // Two different model questions are never related by rule.
  EXPECT_FALSE(dsl_subsumes(parse({{"kind", "llm_question"}, {"questions", {"Is it short?"}}}),
                            parse({{"kind", "llm_question"}, {"questions", {"Is it brief?"}}})));
}

TEST(DslRules, SoundnessFuzz) {
  const auto outcome = testing::dsl_soundness_fuzz(10000, 77);
  // The catalog is built so that every rule family fires.
  EXPECT_GE(outcome.pairs, 40u);
  EXPECT_EQ(outcome.witnesses, 0u) << outcome.first_witness;
}

TEST(Matrix, ValidationAndJson) {
  auto k = identity_subsumption({"a", "b", "c"});
  k.cells[0][1] = 1;
  k.provenance[{0, 1}] = Provenance::kLlm;
  EXPECT_NO_THROW(k.validate());
  const auto again = subsumption_from_json(subsumption_to_json(k));
  EXPECT_EQ(again.cells, k.cells);
  EXPECT_EQ(again.provenance, k.provenance);
  EXPECT_EQ(subsumption_to_json(again).dump(), subsumption_to_json(k).dump());

  auto bad = k;
  bad.cells[2][2] = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = k;
  bad.provenance[{1, 2}] = Provenance::kLlm;  // cell not set
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = k;
  bad.cells.pop_back();
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_THROW(k.index("zzz"), UnknownAssertionError);
  EXPECT_EQ(parse_provenance("TRANSITIVE"), Provenance::kTransitive);
}

SubsumptionMatrix two_trees() {
  auto k = identity_subsumption({"a", "b", "c", "d", "e", "f"});
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {1, 3}, {4, 5}}) {
    k.cells[i][j] = 1;
    k.provenance[{i, j}] = Provenance::kDslRule;
  }
  return k;
}

TEST(Closure, TwoTrees) {
  auto k = two_trees();
  EXPECT_FALSE(k.is_transitively_closed());
  transitive_closure(k);
  EXPECT_TRUE(k.is_transitively_closed());
  EXPECT_TRUE(k.implies(0, 2));
  EXPECT_TRUE(k.implies(0, 3));
  EXPECT_FALSE(k.implies(0, 5));
  EXPECT_FALSE(k.implies(2, 0));
  EXPECT_EQ(k.provenance.at({0, 2}), Provenance::kTransitive);
  EXPECT_EQ(k.provenance.at({0, 1}), Provenance::kDslRule);
  EXPECT_EQ(k.provenance.size(), 6u);
}

TEST(Closure, MatchesBfsOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = static_cast<std::size_t>(rng.uniform(1, 25));
    auto k = identity_subsumption(testing::column_ids(m));
    const double p = rng.unit() * 0.3;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j && rng.chance(p)) k.cells[i][j] = 1;  // cycles allowed
      }
    }
    const auto expected = testing::bfs_closure(k.cells);
    transitive_closure(k);
    ASSERT_EQ(k.cells, expected) << "trial " << trial;
    ASSERT_TRUE(k.is_transitively_closed());
    ASSERT_NO_THROW(k.validate());
  }
}

TEST(Refutation, InstanceW) {
  const auto m = testing::instance_w_matrix();
  EXPECT_FALSE(refutation_witness("f3", "f1", m).has_value());
  EXPECT_FALSE(prune_pair_by_examples("f3", "f1", m));
  ASSERT_TRUE(refutation_witness("f1", "f3", m).has_value());
  EXPECT_EQ(*refutation_witness("f1", "f3", m), 1u);
  EXPECT_THROW(prune_pair_by_examples("f1", "nope", m), UnknownAssertionError);
}

TEST(SkipSet, InstanceW) {
  const auto m = testing::instance_w_matrix();
  const auto labels = testing::instance_w_labels();
  EXPECT_EQ(ffr_skip_set(m, labels, 0.25), (std::set<std::string>{"f2"}));
  EXPECT_EQ(ffr_skip_set(m, labels, 0.5), (std::set<std::string>{"f2"}));
  EXPECT_TRUE(ffr_skip_set(m, labels, 0.75).empty());
  // Zero-FFR assertions are never skipped, even at tau = 0.
  EXPECT_EQ(ffr_skip_set(m, labels, 0.0), (std::set<std::string>{"f2"}));
}

CandidateSet llm_candidates() {
  CandidateSet set;
  const char* ids[] = {"q_concise", "q_brief", "w_short"};
  const json specs[] = {{{"kind", "llm_question"}, {"questions", {"Is the response concise?"}}},
                        {{"kind", "llm_question"}, {"questions", {"Is the response brief?"}}},
                        {{"kind", "word_count"}, {"max", 50}}};
  for (int i = 0; i < 3; ++i) {
    Candidate c;
    c.id = ids[i];
    c.concept_text = "The response should be concise.";
    c.spec = parse(specs[i]);
    c.spec.id = c.id;
    set.candidates.push_back(c);
  }
  return set;
}

LlmGateway live(const testing::ScriptServer& server) {
  GatewayConfig c;
  c.mode = GatewayMode::kLive;
  c.api_key = "k";
  c.endpoint = server.endpoint();
  return LlmGateway(c);
}

TEST(LlmPairs, BothDirectionsForEquivalentQuestions) {
  testing::ScriptServer server(
      json{{"rules",
        {{{"all", json::array({"Here are all the functions I have", "def q_concise(example, prompt, response)"})},
          {"reply", "q_concise and q_brief check the same thing."}},
         {{"all", json::array({"Please return your answer as a JSON list"})},
          {"reply", "```json\n[('q_concise', 'q_brief'), (\"q_brief\", \"q_concise\"), "
                    "(\"q_brief\", \"q_brief\")]\n```"}}}}});
  auto gw = live(server);
  std::string failure;
  const auto pairs = llm_subsumption_pairs(llm_candidates(), gw, nullptr, &failure);
  EXPECT_TRUE(failure.empty());
  const std::vector<std::pair<std::string, std::string>> expected = {{"q_concise", "q_brief"},
                                                                    {"q_brief", "q_concise"}};
  EXPECT_EQ(pairs, expected);
}

TEST(LlmPairs, UnknownNameDropped) {
  testing::ScriptServer server(
      json{{"rules",
        {{{"all", json::array({"Here are all the functions I have"})}, {"reply", "none"}},
         {{"all", json::array({"Please return your answer"})},
          {"reply", "```json\n[[\"q_concise\", \"made_up\"]]\n```"}}}}});
  auto gw = live(server);
  std::vector<std::string> warnings;
  EXPECT_TRUE(llm_subsumption_pairs(llm_candidates(), gw, &warnings).empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("made_up"), std::string::npos);
}

TEST(LlmPairs, UnparseableAfterRetry) {
  testing::ScriptServer server(
      json{{"rules",
        {{{"all", json::array({"Here are all the functions I have"})}, {"reply", "none"}},
         {{"all", json::array({"could not be parsed"})}, {"reply", "still prose"}},
         {{"all", json::array({"Please return your answer"})}, {"reply", "There are none."}}}}});
  auto gw = live(server);
  std::string failure;
  EXPECT_TRUE(llm_subsumption_pairs(llm_candidates(), gw, nullptr, &failure).empty());
  EXPECT_FALSE(failure.empty());
  EXPECT_EQ(server.hits(), 3u);
}

TEST(LlmPairs, NeedsTwoCandidates) {
  testing::ScriptServer server(json{{"rules", json::array()}});
  auto gw = live(server);
  auto one = llm_candidates();
  one.candidates.resize(1);
  EXPECT_THROW(llm_subsumption_pairs(one, gw), PreconditionError);
}

struct MovieArtifacts {
  CandidateSet candidates;
  ExampleSet examples;
  ResultMatrix m;
};

MovieArtifacts movie(LlmGateway& gw) {
  MovieArtifacts a;
  a.candidates = load_candidates(kMovie / "golden" / "candidates.json");
  a.examples = load_examples(kMovie / "examples.json");
  a.m = build_result_matrix(a.candidates, a.examples, &gw);
  return a;
}

TEST(Build, MovieFixtureRefutesPairAndKeepsEquivalences) {
  GatewayConfig c;
  c.mode = GatewayMode::kReplay;
  c.cache_dir = kMovie / "cache";
  LlmGateway gw(c);
  const auto a = movie(gw);
  SubsumptionReport report;
  const auto k = build_subsumption_matrix(a.candidates, a.m, a.examples.labels(), 0.25, &gw, &report);
  EXPECT_TRUE(report.llm_failure.empty()) << report.llm_failure;
  EXPECT_TRUE(k.is_transitively_closed());

  ASSERT_EQ(report.refuted.size(), 1u);
  EXPECT_EQ(report.refuted[0].from, "a3_1_concise");
  EXPECT_EQ(report.refuted[0].to, "a4_1_under_100_words");
  EXPECT_EQ(report.refuted[0].witness_example, "b1");
  EXPECT_FALSE(k.implies(k.index("a3_1_concise"), k.index("a4_1_under_100_words")));

  const auto i = k.index("a6_1_mentions_awards");
  const auto j = k.index("a6_2_awards_question");
  EXPECT_TRUE(k.implies(i, j));
  EXPECT_TRUE(k.implies(j, i));
  EXPECT_EQ(k.provenance.at({i, j}), Provenance::kLlm);
  EXPECT_EQ(report.skipped, (std::set<std::string>{"a5_2_shared_cast"}));
  EXPECT_TRUE(report.alarms.empty());
  EXPECT_GE(report.provenance_counts["DSL_RULE"], 4u);
  // The rule pair a4_3 => a4_1 plus the model pair a2_2 => a1_2 share no
  // node, but a4_3 => a1_1 exists by rule as well.
  EXPECT_EQ(k.provenance.at({k.index("a4_3_short_and_named"), k.index("a1_1_mentions_movie_name")}),
            Provenance::kDslRule);
}

TEST(Build, GatewayOffFallsBackToRules) {
  GatewayConfig c;
  c.mode = GatewayMode::kReplay;
  c.cache_dir = kMovie / "cache";
  LlmGateway replay(c);
  const auto a = movie(replay);
  SubsumptionReport report;
  const auto k =
      build_subsumption_matrix(a.candidates, a.m, a.examples.labels(), 0.25, nullptr, &report);
  EXPECT_FALSE(report.llm_failure.empty());
  for (const auto& [cell, p] : k.provenance) EXPECT_NE(p, Provenance::kLlm);
  EXPECT_GE(report.dsl_pairs, 4u);
}

TEST(Build, DimensionMismatch) {
  const auto set = llm_candidates();
  const auto m = testing::instance_w_matrix();
  EXPECT_THROW(build_subsumption_matrix(set, m, testing::instance_w_labels(), 0.25, nullptr),
               DimensionMismatchError);
}

}  // namespace
}  // namespace deltacheck
