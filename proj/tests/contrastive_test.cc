// Copyright 2026 The hmgrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hmgrec/contrastive.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.h"

namespace hmgrec {
namespace {

using testing::Rec;

// Reference value of the two-term objective, written out with no
// stabilization. Only valid for moderate similarities.
double ClosedForm(double pos, double neg) {
  return -std::log(std::exp(pos) / (std::exp(pos) + std::exp(neg)));
}

TEST(SimilarityTest, DotOverTemperature) {
  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0}, v{2, 3, 0};
  EXPECT_DOUBLE_EQ(Similarity(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(Similarity(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(Similarity(v, v, 0.5), 2 * Similarity(v, v));
}

TEST(InfoNceTest, KnownValues) {
  EXPECT_NEAR(InfoNcePairLoss(0.3, 0.3), std::log(2.0), 1e-12);
  EXPECT_NEAR(InfoNcePairLoss(1.0, 0.0), 0.31326, 1e-5);
  EXPECT_NEAR(InfoNcePairLoss(50.0, -50.0), 0.0, 1e-12);
}

TEST(InfoNceTest, MatchesClosedFormOnRandomScalars) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 1000; ++i) {
    const double pos = u(rng), neg = u(rng);
    EXPECT_NEAR(InfoNcePairLoss(pos, neg), ClosedForm(pos, neg), 1e-9);
  }
}

TEST(InfoNceTest, BoundsAndMonotonicity) {
  for (double neg = -3; neg <= 3; neg += 0.5) {
    double previous = INFINITY;
    for (double pos = -5; pos <= 5; pos += 0.25) {
      const double loss = InfoNcePairLoss(pos, neg);
      EXPECT_GT(loss, 0.0);
      EXPECT_LT(loss, previous);
      if (pos > neg) {
        EXPECT_LT(loss, std::log(2.0));
      } else if (pos < neg) {
        EXPECT_GT(loss, std::log(2.0));
      }
      previous = loss;
    }
  }
}

TEST(InfoNceTest, ShiftInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 100; ++i) {
    const double pos = u(rng), neg = u(rng), c = 100 * u(rng);
    EXPECT_NEAR(InfoNcePairLoss(pos + c, neg + c), InfoNcePairLoss(pos, neg), 1e-9);
  }
}

TEST(InfoNceTest, StableAtExtremeSimilarities) {
  EXPECT_TRUE(std::isfinite(InfoNcePairLoss(700, -700)));
  EXPECT_TRUE(std::isfinite(InfoNcePairLoss(-700, 700)));
  EXPECT_NEAR(InfoNcePairLoss(-700, 700), 1400.0, 1e-9);
  EXPECT_NEAR(InfoNcePairLoss(700, 700), std::log(2.0), 1e-12);
}

ContrastTriple Triple(std::vector<double> prev, std::vector<double> cur,
                      std::vector<double> cross) {
  return {1, ad::Parameter(Tensor::Row(prev)), ad::Parameter(Tensor::Row(cur)),
          ad::Parameter(Tensor::Row(cross))};
}

TEST(InfoNceTest, VarVersionAgreesAndDifferentiates) {
  ContrastTriple t = Triple({0.2, -0.4}, {1.0, 0.5}, {0.7, 0.1});
  const ad::Var loss = InfoNcePairLoss(t, 0.5);
  const double pos = Similarity(t.current.value().values(), t.cross.value().values(), 0.5);
  const double neg = Similarity(t.current.value().values(), t.previous.value().values(), 0.5);
  EXPECT_NEAR(loss.value().item(), ClosedForm(pos, neg), 1e-12);
  ad::Backward(loss);
  // Gradient pushes the cross embedding towards the anchor.
  EXPECT_LT(t.cross.grad()[0], 0.0);
  EXPECT_GT(t.previous.grad()[0], 0.0);
}

TEST(ContrastiveLossTest, MeanOverUsersOfSumOverLevels) {
  const double ln2 = std::log(2.0);
  const std::vector<std::vector<double>> two_users{{ln2, ln2, ln2}, {ln2, ln2, ln2}};
  EXPECT_NEAR(ContrastiveLoss(two_users), 3 * ln2, 1e-12);
  EXPECT_NEAR(ContrastiveLoss(two_users), 2.0794, 1e-4);
  const std::vector<std::vector<double>> one{{0.42}};
  EXPECT_DOUBLE_EQ(ContrastiveLoss(one), 0.42);
  const std::vector<std::vector<double>> dup{{0.1, 0.2}, {0.3, 0.4}, {0.1, 0.2}, {0.3, 0.4}};
  const std::vector<std::vector<double>> half{{0.1, 0.2}, {0.3, 0.4}};
  EXPECT_NEAR(ContrastiveLoss(dup), ContrastiveLoss(half), 1e-15);
}

TEST(ContrastiveLossTest, VarVersionEqualsScalarVersion) {
  std::vector<std::vector<ContrastTriple>> per_user{
      {Triple({1, 0}, {0, 1}, {1, 1}), Triple({0.5, 0.5}, {1, -1}, {0, 2})},
      {Triple({0, 0}, {2, 1}, {1, 0}), Triple({1, 1}, {1, 1}, {1, 1})}};
  std::vector<std::vector<double>> losses;
  for (const auto &user : per_user) {
    losses.emplace_back();
    for (const auto &t : user) losses.back().push_back(InfoNcePairLoss(t).value().item());
  }
  EXPECT_NEAR(ContrastiveLoss(per_user).value().item(), ContrastiveLoss(losses), 1e-14);
}

struct Fixture {
  Dataset dataset;
  ParameterStore params;
  std::vector<ad::Var> tables;
  std::vector<std::shared_ptr<const GraphEncoder>> encoders;
  std::vector<EncoderInput> graphs;

  explicit Fixture(const std::vector<InteractionRecord> &log) {
    dataset = Dataset::FromRecords(BehaviorVocab::Default(), log);
    std::mt19937_64 rng(5);
    const size_t h = 3;
    tables.push_back(params.AddUniform("u", dataset.num_users(), h, h, rng));
    tables.push_back(params.AddUniform("b", 4, h, h, rng));
    tables.push_back(params.AddUniform("i", dataset.num_items(), h, h, rng));
    EncoderConfig c;
    c.hidden = h;
    c.layers = 2;
    encoders = MakeLevelEncoders(4, c, params, rng);
    for (const auto &g : BuildAllLevels(dataset, 0)) graphs.push_back(ToEncoderInput(g));
  }
  ContrastEmbeddings Build() const { return BuildContrastEmbeddings(graphs, encoders, tables); }
};

TEST(BuildContrastEmbeddingsTest, FourLevelsGiveThreeTriples) {
  Fixture f({Rec("u", "a", 0, 1), Rec("u", "a", 1, 2), Rec("u", "a", 2, 3), Rec("u", "a", 3, 4)});
  const ContrastEmbeddings e = f.Build();
  EXPECT_EQ(e.primary.size(), 4u);
  ASSERT_EQ(e.triples.size(), 3u);
  for (size_t t = 1; t <= 3; ++t) {
    EXPECT_EQ(e.triples[t - 1].level, static_cast<int>(t));
    EXPECT_TRUE(e.triples[t - 1].previous.SameNode(e.primary[t - 1]));
    EXPECT_TRUE(e.triples[t - 1].current.SameNode(e.primary[t]));
  }
}

TEST(BuildContrastEmbeddingsTest, IdenticalGraphsGiveCrossEqualToPrevious) {
  Fixture f({Rec("u", "a", 3, 1), Rec("u", "b", 3, 2)});
  const ContrastEmbeddings e = f.Build();
  for (const auto &t : e.triples) EXPECT_EQ(t.cross.value(), t.previous.value());
  // Identical levels make the two similarities equal.
  EXPECT_NEAR(UserContrastiveLoss(e.triples).value().item(), 3 * std::log(2.0), 1e-12);
}

TEST(BuildContrastEmbeddingsTest, GradientsReachBothAdjacentEncoders) {
  Fixture f({Rec("u", "a", 0, 1), Rec("u", "a", 3, 2), Rec("u", "b", 0, 3), Rec("u", "b", 1, 4)});
  const ContrastEmbeddings e = f.Build();
  const ContrastTriple &t1 = e.triples[0];
  f.params.ZeroGrad();
  ad::Backward(InfoNcePairLoss(t1));
  for (size_t level : {0u, 1u}) {
    double norm = 0;
    for (const ad::Var &p : f.encoders[level]->parameters()) norm += p.grad().Norm();
    EXPECT_GT(norm, 0.0) << "encoder " << level;
  }
  const auto results =
      GradCheck(f.params, [&] { return InfoNcePairLoss(f.Build().triples[0]); }, 1e-5);
  for (const auto &r : results) EXPECT_TRUE(r.passed) << r.name << " " << r.relative_error;
}

}  // namespace
}  // namespace hmgrec
