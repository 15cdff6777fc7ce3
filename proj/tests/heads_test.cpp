/**
 * Copyright 2026 The Cellformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/error.hpp"
#include "cellformer/model/heads.hpp"
#include "cellformer/model/metrics.hpp"
#include "cellformer/random.hpp"

namespace cellformer {
namespace {

double Log1pExp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

TEST(ExpandTargetsTest, Examples) {
  EXPECT_EQ(ExpandTargets(2, 5), (std::vector<int>{1, 1, 0, 0}));
  EXPECT_EQ(ExpandTargets(0, 5), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(ExpandTargets(4, 5), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_THROW(ExpandTargets(5, 5), InvalidArgument);
  EXPECT_THROW(ExpandTargets(-1, 5), InvalidArgument);
}

TEST(HeadNameTest, RoundTrip) {
  for (auto kind : {HeadKind::kCrossEntropy, HeadKind::kOrdinal, HeadKind::kCoral})
    EXPECT_EQ(ParseHead(HeadName(kind)), kind);
  EXPECT_THROW(ParseHead("softmax"), InvalidArgument);
}

TEST(OrdinalLossTest, SymmetricLogitsGiveLn2) {
  const int y[] = {1};
  EXPECT_NEAR(OrdinalLoss(ad::Tensor::Constant({1, 2}, {0.7, 0.7}), y).item(), std::log(2.0), 1e-12);
}

TEST(OrdinalLossTest, SaturatedCorrectIsNearZero) {
  std::vector<double> row;
  for (int k = 0; k < 4; ++k) row.insert(row.end(), {0.0, 10.0});
  const int y[] = {4};
  const double loss = OrdinalLoss(ad::Tensor::Constant({1, 8}, row), y).item();
  EXPECT_LT(loss, 1e-3);
  EXPECT_GE(loss, 0.0);
}

TEST(OrdinalLossTest, MatchesScalarOracle) {
  // K = 3: tasks (o0, o1) = (0.3, -0.2) and (-1.1, 0.4); y = 1 gives targets (1, 0).
  const double p0 = std::exp(-0.2) / (std::exp(-0.2) + std::exp(0.3));
  const double p1 = std::exp(0.4) / (std::exp(0.4) + std::exp(-1.1));
  const double expected = -(std::log(p0) + std::log(1.0 - p1));
  const int y[] = {1};
  EXPECT_NEAR(OrdinalLoss(ad::Tensor::Constant({1, 4}, {0.3, -0.2, -1.1, 0.4}), y).item(), expected, 1e-9);
}

TEST(OrdinalLossTest, NormalisedBySamplesOnly) {
  // Two identical samples with K = 3 and symmetric logits: each task costs ln 2,
  // so each sample costs 2 ln 2 and the mean over samples stays 2 ln 2.
  const int y[] = {0, 2};
  const auto loss = OrdinalLoss(ad::Tensor::Zeros({2, 4}), y).item();
  EXPECT_NEAR(loss, 2.0 * std::log(2.0), 1e-12);
}

TEST(OrdinalLossTest, NonNegativeOnRandomBatches) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(3 * 6);
    for (auto& x : v) x = rng.Uniform(-8, 8);
    const int y[] = {static_cast<int>(rng.UniformInt(4)), static_cast<int>(rng.UniformInt(4)),
                     static_cast<int>(rng.UniformInt(4))};
    EXPECT_GT(OrdinalLoss(ad::Tensor::Constant({3, 6}, v), y).item(), 0.0);
  }
}

TEST(OrdinalLossTest, RejectsBadInputs) {
  const int y[] = {3};
  EXPECT_THROW(OrdinalLoss(ad::Tensor::Zeros({1, 4}), y), InvalidArgument);
  const int ok[] = {0};
  EXPECT_THROW(OrdinalLoss(ad::Tensor::Zeros({1, 3}), ok), ShapeError);
  EXPECT_THROW(OrdinalLoss(ad::Tensor::Zeros({2, 4}), ok), ShapeError);
}

TEST(CrossEntropyLossTest, UniformLogitsGiveLn5) {
  const int y[] = {3};
  EXPECT_NEAR(CrossEntropyLoss(ad::Tensor::Constant({1, 5}, {2, 2, 2, 2, 2}), y).item(), std::log(5.0), 1e-12);
}

TEST(CrossEntropyLossTest, LargeMarginIsNearZero) {
  const int y[] = {2};
  EXPECT_LT(CrossEntropyLoss(ad::Tensor::Constant({1, 5}, {0, 0, 20, 0, 0}), y).item(), 1e-6);
}

TEST(CrossEntropyLossTest, MeanOverSamples) {
  const std::vector<double> v = {0.5, -1.0, 2.0, 1.5, 0.0, -0.5};
  const int y[] = {2, 0};
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    double z = 0.0;
    for (int k = 0; k < 3; ++k) z += std::exp(v[3 * i + k]);
    expected -= v[3 * i + y[i]] - std::log(z);
  }
  EXPECT_NEAR(CrossEntropyLoss(ad::Tensor::Constant({2, 3}, v), y).item(), expected / 2.0, 1e-12);
}

TEST(DecodeTest, CountRuleExamples) {
  EXPECT_EQ(CountDecode(std::vector<double>{0.9, 0.8, 0.4, 0.1}), 2);
  EXPECT_EQ(CountDecode(std::vector<double>{0.4, 0.3, 0.2, 0.1}), 0);
  EXPECT_EQ(CountDecode(std::vector<double>{0.9, 0.8, 0.7, 0.6}), 4);
  EXPECT_EQ(CountDecode(std::vector<double>{0.5, 0.5}), 0);
}

TEST(DecodeTest, ArgmaxTieGoesToLowestIndex) {
  EXPECT_EQ(ArgmaxDecode(std::vector<double>{0.1, 2.0, -1.0, 2.0, 0.0}), 1);
  EXPECT_THROW(ArgmaxDecode(std::vector<double>{}), InvalidArgument);
}

// OR output row whose per-task probabilities are exactly p.
std::vector<double> OrRow(const std::vector<double>& p) {
  std::vector<double> row;
  for (double q : p) {
    const double logit = q <= 0.0 ? -40.0 : q >= 1.0 ? 40.0 : std::log(q) - std::log1p(-q);
    row.insert(row.end(), {0.0, logit});
  }
  return row;
}

TEST(DecodeTest, OrHeadMatchesCountOverProbabilityGrid) {
  for (int K = 2; K <= 6; ++K) {
    const int tasks = K - 1;
    ParameterSet params;
    Rng rng(0);
    const RankHead head(HeadKind::kOrdinal, 3, 3, K, params, rng);
    std::vector<double> all_rows;
    std::vector<int> expected;
    std::vector<int> digits(tasks, 0);
    while (true) {
      std::vector<double> p(tasks);
      int count = 0;
      for (int k = 0; k < tasks; ++k) {
        p[k] = digits[k] / 10.0;
        count += digits[k] > 5;
      }
      const auto row = OrRow(p);
      all_rows.insert(all_rows.end(), row.begin(), row.end());
      expected.push_back(count);
      int k = 0;
      while (k < tasks && ++digits[k] == 11) digits[k++] = 0;
      if (k == tasks) break;
    }
    const auto n = expected.size();
    EXPECT_EQ(n, static_cast<std::size_t>(std::pow(11, tasks)));
    const auto decoded =
        head.Decode(ad::Tensor::Constant({n, static_cast<std::size_t>(2 * tasks)}, std::move(all_rows)));
    EXPECT_EQ(decoded, expected) << "K = " << K;
  }
}

TEST(DecodeTest, SaturatedExpandedTargetsRoundTrip) {
  for (int K = 2; K <= 10; ++K) {
    for (int y = 0; y < K; ++y) {
      std::vector<double> p;
      for (int t : ExpandTargets(y, K)) p.push_back(t ? 1.0 : 0.0);
      EXPECT_EQ(CountDecode(OrdinalProbabilities(OrRow(p))), y);
      EXPECT_EQ(CountDecode(LogisticProbabilities(std::vector<double>(p.size(), 0.0))), 0);
    }
  }
}

TEST(CoralTest, BiasesStartSortedAndProbabilitiesAreMonotone) {
  ParameterSet params;
  Rng rng(4);
  const RankHead head(HeadKind::kCoral, 6, 5, 5, params, rng);
  EXPECT_TRUE(head.CoralBiasesSorted());
  const auto bias = params.Find("head.coral.bias")->tensor;
  const double expected_bias[] = {1.0, 1.0 / 3.0, -1.0 / 3.0, -1.0};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(bias[k], expected_bias[k], 1e-15);
  std::vector<double> x(50 * 6);
  for (auto& v : x) v = rng.Uniform(-5, 5);
  const auto outputs = head.Forward(ad::Tensor::Constant({50, 6}, x));
  ASSERT_EQ(outputs.shape(), (ad::Shape{50, 4}));
  for (const auto& p : head.Probabilities(outputs))
    for (std::size_t k = 1; k < p.size(); ++k) EXPECT_GE(p[k - 1], p[k]);
}

TEST(CoralTest, UnsortedBiasesAreReported) {
  ParameterSet params;
  Rng rng(4);
  const RankHead head(HeadKind::kCoral, 3, 3, 4, params, rng);
  auto bias = params.Find("head.coral.bias")->tensor;
  bias.values()[2] = 5.0;
  EXPECT_FALSE(head.CoralBiasesSorted());
}

TEST(CoralTest, LossMatchesScalarOracle) {
  const std::vector<double> g = {0.8, 0.1, -0.6, -2.0, 1.5, 0.2, 0.0, -0.3, -0.9};
  const int y[] = {2, 0, 3};
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double p = 1.0 / (1.0 + std::exp(-g[3 * i + k]));
      expected -= y[i] > k ? std::log(p) : std::log(1.0 - p);
    }
  }
  expected /= 9.0;
  EXPECT_NEAR(CoralLoss(ad::Tensor::Constant({3, 3}, g), y).item(), expected, 1e-9);
}

TEST(CoralTest, LossIsStableForLargeLogits) {
  const int y[] = {0};
  const double loss = CoralLoss(ad::Tensor::Constant({1, 2}, {800.0, -800.0}), y).item();
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_NEAR(loss, (Log1pExp(800.0) + Log1pExp(-800.0)) / 2.0, 1e-9);
}

TEST(RankHeadTest, OutputWidths) {
  for (auto [kind, width] : {std::pair{HeadKind::kCrossEntropy, 5u}, std::pair{HeadKind::kOrdinal, 8u},
                             std::pair{HeadKind::kCoral, 4u}}) {
    ParameterSet params;
    Rng rng(2);
    const RankHead head(kind, 4, 6, 5, params, rng);
    EXPECT_EQ(head.output_width(), width);
    EXPECT_EQ(head.Forward(ad::Tensor::Zeros({3, 4})).shape(), (ad::Shape{3, width}));
  }
  ParameterSet params;
  Rng rng(2);
  EXPECT_THROW(RankHead(HeadKind::kOrdinal, 4, 6, 1, params, rng), InvalidArgument);
}

TEST(MetricsTest, Examples) {
  const int same[] = {0, 1, 4};
  EXPECT_EQ(ComputeMetrics(same, same), (RankMetrics{0.0, 0.0}));
  const int p1[] = {0, 2}, t1[] = {1, 1};
  EXPECT_EQ(Rmse(p1, t1), 1.0);
  EXPECT_EQ(Mae(p1, t1), 1.0);
  const int p2[] = {0}, t2[] = {4};
  EXPECT_EQ(Rmse(p2, t2), 4.0);
  EXPECT_EQ(Mae(p2, t2), 4.0);
  const int p3[] = {0, 0}, t3[] = {0, 2};
  EXPECT_DOUBLE_EQ(Rmse(p3, t3), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(Mae(p3, t3), 1.0);
  EXPECT_THROW(Rmse(std::span<const int>{}, std::span<const int>{}), InvalidArgument);
  EXPECT_THROW(Mae(p1, t2), InvalidArgument);
}

TEST(MetricsTest, MaeNeverExceedsRmse) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(50);
    std::vector<int> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.UniformInt(5));
      t[i] = static_cast<int>(rng.UniformInt(5));
    }
    EXPECT_LE(Mae(p, t), Rmse(p, t) + 1e-12);
  }
}

}  // namespace
}  // namespace cellformer
