// Copyright 2026 The tokenshot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <map>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/errors.hpp"
#include "tokenshot/io_formats.hpp"
#include "tokenshot/synthetic.hpp"

namespace tokenshot {
namespace {

std::set<std::string> Ids(const std::vector<LabeledGrid>& grids) {
  std::set<std::string> ids;
  for (const auto& g : grids) ids.insert(g.grid.image_id());
  return ids;
}

EvalConfig SmallConfig() {
  EvalConfig cfg;
  cfg.n_way = 3;
  cfg.k_shot = 2;
  cfg.n_query_per_class = 2;
  cfg.episodes = 12;
  cfg.seed = 5;
  cfg.classifier.steps = 3;
  return cfg;
}

TEST(MeanWithCi95Test, SampleStandardDeviation) {
  const std::vector<double> x = {0.0, 1.0, 0.5, 0.5};
  const MeanAndCi s = MeanWithCi95(x);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  // Sample variance = 0.5 / 3.
  EXPECT_NEAR(s.ci95, 1.96 * std::sqrt(0.5 / 3.0) / 2.0, 1e-15);
}

TEST(MeanWithCi95Test, ConstantValuesHaveZeroInterval) {
  const std::vector<double> x(7, 1.0);
  EXPECT_EQ(MeanWithCi95(x).ci95, 0.0);
  const std::vector<double> one = {0.3};
  EXPECT_EQ(MeanWithCi95(one).ci95, 0.0);
}

TEST(TokenDatasetTest, RejectsInconsistentShapes) {
  Rng rng(1);
  std::vector<TokenClass> classes = {
      {"a", {testing::RandomGrid(rng, {2, 2}, 3, "a0")}},
      {"b", {testing::RandomGrid(rng, {2, 2}, 4, "b0")}}};
  EXPECT_THROW(TokenDataset{classes}, DataError);
  EXPECT_THROW(TokenDataset(std::vector<TokenClass>{}), DataError);
  EXPECT_THROW(TokenDataset(std::vector<TokenClass>{TokenClass{"empty", {}}}), DataError);
}

TEST(EvalConfigTest, Validation) {
  EvalConfig cfg;
  EXPECT_EQ(cfg.episodes, 600);
  EXPECT_EQ(cfg.n_query_per_class, 15);
  EXPECT_NO_THROW(cfg.Validate());
  cfg.episodes = 0;
  EXPECT_THROW(cfg.Validate(), InvalidArgumentError);
  cfg = {};
  cfg.n_way = 1;
  EXPECT_THROW(cfg.Validate(), InvalidArgumentError);
  cfg = {};
  cfg.steps_sweep = {0, -1};
  EXPECT_THROW(cfg.Validate(), InvalidArgumentError);
}

TEST(SampleEpisodeTest, ExactSizeDatasetUsesEveryGrid) {
  const TokenDataset data = RandomTokenDataset(3, 3, {1, 2}, 4, 9);
  EvalConfig cfg;
  cfg.n_way = 3;
  cfg.k_shot = 2;
  cfg.n_query_per_class = 1;
  const Episode e = SampleEpisode(data, cfg, 0);
  const auto s = Ids(e.support());
  const auto q = Ids(e.queries());
  EXPECT_EQ(s.size(), 6U);
  EXPECT_EQ(q.size(), 3U);
  for (const auto& id : q) EXPECT_EQ(s.count(id), 0U);
}

TEST(SampleEpisodeTest, SameSeedSameEpisode) {
  const TokenDataset data = RandomTokenDataset(8, 10, {2, 2}, 4, 9);
  const EvalConfig cfg = SmallConfig();
  for (int i = 0; i < 5; ++i) {
    const Episode a = SampleEpisode(data, cfg, i);
    const Episode b = SampleEpisode(data, cfg, i);
    for (std::size_t j = 0; j < a.support().size(); ++j) {
      EXPECT_EQ(a.support()[j].grid.image_id(), b.support()[j].grid.image_id());
    }
    for (std::size_t j = 0; j < a.queries().size(); ++j) {
      EXPECT_EQ(a.queries()[j].grid.image_id(), b.queries()[j].grid.image_id());
    }
  }
}

TEST(SampleEpisodeTest, SupportAndQueriesDisjointAndLabelled) {
  const TokenDataset data = RandomTokenDataset(6, 8, {2, 2}, 4, 9);
  const EvalConfig cfg = SmallConfig();
  for (int i = 0; i < 50; ++i) {
    const Episode e = SampleEpisode(data, cfg, i);
    const auto s = Ids(e.support());
    const auto q = Ids(e.queries());
    EXPECT_EQ(s.size() + q.size(), 12U);
    for (const auto& id : q) EXPECT_EQ(s.count(id), 0U);
    // Every grid of one episode label comes from the same dataset class.
    std::map<int, std::string> label_class;
    for (const auto* group : {&e.support(), &e.queries()}) {
      for (const auto& g : *group) {
        const std::string cls = g.grid.image_id().substr(0, g.grid.image_id().find('/'));
        auto [it, inserted] = label_class.emplace(g.label, cls);
        EXPECT_EQ(it->second, cls);
      }
    }
  }
}

TEST(SampleEpisodeTest, ClassFrequencyIsUniform) {
  const TokenDataset data = RandomTokenDataset(20, 2, {1, 1}, 2, 3);
  EvalConfig cfg;
  cfg.n_way = 5;
  cfg.k_shot = 1;
  cfg.n_query_per_class = 1;
  cfg.seed = 17;
  std::map<std::string, int> counts;
  for (int i = 0; i < 1000; ++i) {
    const Episode e = SampleEpisode(data, cfg, i);
    for (const auto& s : e.support()) {
      ++counts[s.grid.image_id().substr(0, s.grid.image_id().find('/'))];
    }
  }
  ASSERT_EQ(counts.size(), 20U);
  for (const auto& [name, count] : counts) {
    EXPECT_NEAR(count / 1000.0, 0.25, 0.05) << name;
  }
}

TEST(SampleEpisodeTest, Errors) {
  const TokenDataset data = RandomTokenDataset(3, 3, {1, 2}, 4, 9);
  EvalConfig cfg;
  cfg.n_way = 4;
  cfg.k_shot = 1;
  cfg.n_query_per_class = 1;
  EXPECT_THROW(SampleEpisode(data, cfg, 0), DataError);
  cfg.n_way = 3;
  cfg.k_shot = 3;
  EXPECT_THROW(SampleEpisode(data, cfg, 0), DataError);
}

TEST(EvaluateTest, OrthogonalDatasetIsPerfect) {
  const TokenDataset data = OrthogonalDataset(8, 20, {3, 3}, 16, 0.05, 2);
  EvalConfig cfg;
  cfg.n_way = 5;
  cfg.k_shot = 5;
  cfg.episodes = 10;
  const EvalReport r = Evaluate(data, cfg);
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.ci95, 0.0);
  EXPECT_EQ(r.per_episode_accuracy.size(), 10U);
}

TEST(EvaluateTest, FixedSeedIsReproducible) {
  const TokenDataset data = RandomTokenDataset(6, 8, {2, 2}, 6, 4);
  const EvalConfig cfg = SmallConfig();
  const EvalReport a = Evaluate(data, cfg);
  const EvalReport b = Evaluate(data, cfg);
  EXPECT_EQ(a.per_episode_accuracy, b.per_episode_accuracy);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.ci95, b.ci95);
}

TEST(EvaluateTest, IndependentOfWorkerCount) {
  const TokenDataset data = RandomTokenDataset(6, 8, {2, 2}, 6, 4);
  EvalConfig cfg = SmallConfig();
  cfg.jobs = 1;
  const EvalReport a = Evaluate(data, cfg);
  cfg.jobs = 4;
  const EvalReport b = Evaluate(data, cfg);
  EXPECT_EQ(a.per_episode_accuracy, b.per_episode_accuracy);
}

TEST(EvaluateTest, SweepReusesEpisodesAndKeepsRequestOrder) {
  const TokenDataset data = RandomTokenDataset(6, 8, {2, 2}, 6, 4);
  EvalConfig cfg = SmallConfig();
  cfg.steps_sweep = {5, 0, 5};
  const auto reports = EvaluateSweep(data, cfg);
  ASSERT_EQ(reports.size(), 3U);
  EXPECT_EQ(reports[0].config.classifier.steps, 5);
  EXPECT_EQ(reports[1].config.classifier.steps, 0);
  EXPECT_EQ(reports[0].per_episode_accuracy, reports[2].per_episode_accuracy);
  for (const int steps : {0, 5}) {
    EvalConfig single = SmallConfig();
    single.classifier.steps = steps;
    const EvalReport r = Evaluate(data, single);
    EXPECT_EQ(r.per_episode_accuracy, reports[steps == 0 ? 1 : 0].per_episode_accuracy);
  }
}

TEST(EvaluateTest, EchoesResolvedConfig) {
  const TokenDataset data = RandomTokenDataset(6, 8, {2, 2}, 16, 4);
  const EvalReport r = Evaluate(data, SmallConfig());
  ASSERT_TRUE(r.config.classifier.tau.has_value());
  EXPECT_DOUBLE_EQ(*r.config.classifier.tau, 0.25);
  EXPECT_EQ(r.config.classifier.steps, 3);
  EXPECT_GE(r.wall_ms_per_episode, 0.0);
}

TEST(EvaluateTest, DegenerateEpisodeAbortsWithIndex) {
  // 1-shot on a 2x2 grid with the default 5x5 window masks the whole image.
  const TokenDataset data = RandomTokenDataset(4, 4, {2, 2}, 4, 4);
  EvalConfig cfg = SmallConfig();
  cfg.k_shot = 1;
  cfg.jobs = 3;
  try {
    Evaluate(data, cfg);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("episode 0: ", 0), 0U) << e.what();
  }
}

TEST(EvaluateTest, RandomTokensNearChance) {
  const TokenDataset data = RandomTokenDataset(10, 20, {2, 2}, 8, 6);
  EvalConfig cfg;
  cfg.n_way = 5;
  cfg.k_shot = 2;
  cfg.n_query_per_class = 5;
  cfg.episodes = 150;
  cfg.classifier.steps = 0;
  const EvalReport r = Evaluate(data, cfg);
  EXPECT_NEAR(r.mean, 0.2, 0.06);
}

}  // namespace
}  // namespace tokenshot
