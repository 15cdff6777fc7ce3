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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/data/csv.hpp"
#include "cellformer/embed/embedding.hpp"
#include "cellformer/error.hpp"
#include "cellformer/model/checkpoint.hpp"
#include "cellformer/model/rank_model.hpp"
#include "cellformer/train/adam.hpp"
#include "cellformer/train/config.hpp"
#include "cellformer/train/experiment.hpp"
#include "cellformer/train/featurize.hpp"
#include "cellformer/train/reports.hpp"

namespace cellformer {
namespace {

class TempDir {
 public:
  TempDir()
      : path_(std::filesystem::temp_directory_path() /
              ("cellformer_train_test_" +
               std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

TrainConfig TinyConfig() {
  TrainConfig config;
  config.learning_rate = 1e-3;
  config.max_epochs = 12;
  config.patience = 4;
  config.seeds = {0};
  config.encoder.model_dim = 16;
  config.encoder.layers = 1;
  config.encoder.heads = 2;
  config.embedder.dim = 32;
  config.synth.n = 200;
  return config;
}

std::vector<double> Flatten(const ParameterSet& params) {
  std::vector<double> out;
  for (const auto& p : params.items()) out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

// ---- Adam ----

TEST(AdamTest, FirstStepMovesByAboutTheLearningRate) {
  std::vector<double> x = {1.0};
  const std::vector<double> g = {2.0};
  AdamMoments state;
  AdamStep(x, g, state, {.learning_rate = 0.01});
  const double delta = std::abs(x[0] - 1.0);
  EXPECT_GE(delta, 0.0099);
  EXPECT_LE(delta, 0.01);
  EXPECT_LT(x[0], 1.0);
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamTest, MatchesTheUpdateRuleOverSeveralSteps) {
  std::vector<double> x = {0.5, -1.0};
  AdamMoments state;
  const AdamOptions options{.learning_rate = 0.1};
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {0.5, -1.0};
  const double grads[3][2] = {{1.0, -0.5}, {0.25, 2.0}, {-3.0, 0.0}};
  for (int t = 1; t <= 3; ++t) {
    AdamStep(x, grads[t - 1], state, options);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grads[t - 1][i];
      v[i] = 0.999 * v[i] + 0.001 * grads[t - 1][i] * grads[t - 1][i];
      const double mh = m[i] / (1.0 - std::pow(0.9, t));
      const double vh = v[i] / (1.0 - std::pow(0.999, t));
      ref[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(x[i], ref[i], 1e-14);
    }
  }
}

TEST(AdamTest, ZeroOrEmptyGradientLeavesValuesUnchanged) {
  std::vector<double> x = {0.3, -0.7, 2.0};
  const auto before = x;
  AdamMoments a, b;
  AdamStep(x, std::vector<double>(3, 0.0), a, {});
  EXPECT_EQ(x, before);
  AdamStep(x, std::span<const double>{}, b, {});
  EXPECT_EQ(x, before);
  EXPECT_THROW(AdamStep(x, std::vector<double>(2, 1.0), a, {}), ShapeError);
}

TEST(AdamTest, SkipsFrozenParametersAndIsDeterministic) {
  auto run = [] {
    ParameterSet params;
    Rng rng(3);
    params.AddUniform("trainable", {4}, 4, rng);
    params.AddUniform("frozen", {4}, 4, rng, false);
    Adam adam(params, {.learning_rate = 0.05});
    const auto frozen_before = params.Find("frozen")->tensor;
    const std::vector<double> frozen(frozen_before.values().begin(), frozen_before.values().end());
    for (int step = 0; step < 5; ++step) {
      params.ZeroGrad();
      ad::Sum(ad::Mul(params.Find("trainable")->tensor, params.Find("frozen")->tensor)).backward();
      adam.Step();
    }
    EXPECT_EQ(adam.steps(), 5u);
    const auto after = params.Find("frozen")->tensor;
    EXPECT_EQ(std::vector<double>(after.values().begin(), after.values().end()), frozen);
    return Flatten(params);
  };
  EXPECT_EQ(run(), run());
}

// ---- Config ----

TEST(ConfigTest, DefaultsAndLearningRates) {
  TrainConfig config;
  EXPECT_EQ(config.batch_size, 60u);
  EXPECT_EQ(config.patience, 10u);
  EXPECT_EQ(config.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(config.encoder.layers, 6u);
  EXPECT_EQ(config.encoder.heads, 6u);
  EXPECT_EQ(config.lr(), 1e-5);
  config.head = HeadKind::kCoral;
  EXPECT_EQ(config.lr(), 5e-5);
  config.learning_rate = 0.01;
  EXPECT_EQ(config.lr(), 0.01);
}

TEST(ConfigTest, JsonRoundTripAndPathResolution) {
  const auto config = TrainConfig::FromJson(
      R"({"head": "coral", "seeds": [3, 1], "data": "d.csv", "schema": "s.json", "encoder": {"model_dim": 12, "heads": 3}})",
      "/base");
  EXPECT_EQ(config.head, HeadKind::kCoral);
  EXPECT_EQ(config.seeds, (std::vector<std::uint64_t>{3, 1}));
  EXPECT_EQ(config.data, std::filesystem::path("/base/d.csv"));
  EXPECT_EQ(config.encoder.model_dim, 12u);
  EXPECT_EQ(TrainConfig::FromJson(config.ToJson()).ToJson(), config.ToJson());
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(TrainConfig::FromJson(R"({"heads": "or"})"), Error);
  EXPECT_THROW(TrainConfig::FromJson(R"({"head": "ordinal"})"), Error);
  EXPECT_THROW(TrainConfig::FromJson("[1, 2]"), Error);
  TrainConfig config;
  config.seeds.clear();
  EXPECT_THROW(config.Validate(), InvalidArgument);
  config = TrainConfig();
  config.rates = {0.5, 1.5};
  EXPECT_THROW(config.Validate(), InvalidArgument);
  config = TrainConfig();
  config.data = "x.csv";
  EXPECT_THROW(config.Validate(), InvalidArgument);
}

TEST(ConfigTest, SeedAndRateLists) {
  EXPECT_EQ(ParseSeedList("0-4"), (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(ParseSeedList("7,2"), (std::vector<std::uint64_t>{7, 2}));
  EXPECT_EQ(ParseSeedList("5"), (std::vector<std::uint64_t>{5}));
  EXPECT_THROW(ParseSeedList("4-1"), InvalidArgument);
  EXPECT_THROW(ParseSeedList("a"), InvalidArgument);
  EXPECT_EQ(ParseRateList("0,0.05,0.2"), (std::vector<double>{0.0, 0.05, 0.2}));
  EXPECT_THROW(ParseRateList("0,x"), InvalidArgument);
}

// ---- Featurizer ----

TEST(FeaturizerTest, WidthIsContinuousPlusBinaryPlusCategoryCounts) {
  const auto data = Impute(Synthesize({.n = 300, .seed = 1}));
  const auto featurizer = NumericFeaturizer::Fit(data);
  std::set<std::string> asa;
  for (const auto& r : data.rows) asa.insert(r.cells[2].categorical());
  // age + weight + diabetes + one-hot asa; free text dropped
  EXPECT_EQ(featurizer.width(), 3u + asa.size());
  EXPECT_EQ(featurizer.columns().size(), 4u);
  const auto sample = featurizer.TransformSample(data.rows[0]);
  EXPECT_EQ(sample.rows, 1u);
  EXPECT_EQ(sample.dim, featurizer.width());
  EXPECT_EQ(sample.mask, std::vector<bool>{true});
}

TEST(FeaturizerTest, StandardisesWithTrainingStatisticsOnly) {
  TableSchema schema({FeatureSpec{"w", Modality::kContinuous, Template::Parse("{value}"), Imputation::kMean},
                      FeatureSpec{"c", Modality::kCategorical, Template::Parse("{value}"), Imputation::kMode}},
                     LabelSpec{"duration", kSurgeryEdgesHours, "hours"});
  Dataset train{schema, {}};
  train.rows.push_back({0, {CellValue::MakeContinuous(1.0), CellValue::MakeCategorical("b")}, 0.5});
  train.rows.push_back({1, {CellValue::MakeContinuous(3.0), CellValue::MakeCategorical("a")}, 0.5});
  const auto featurizer = NumericFeaturizer::Fit(train);
  const Row unseen{9, {CellValue::MakeContinuous(100.0), CellValue::MakeCategorical("z")}, 0.5};
  // mean 2, population sd 1; unseen category maps to all zeros
  EXPECT_EQ(featurizer.Transform(unseen), (std::vector<double>{98.0, 0.0, 0.0}));
  EXPECT_EQ(featurizer.Transform(train.rows[0]), (std::vector<double>{-1.0, 0.0, 1.0}));
}

// ---- Pipeline and evaluation ----

TEST(PipelineTest, ImputationFittedOnTrainingSplit) {
  const auto config = TinyConfig();
  const auto data = LoadConfiguredData(config);
  const InputPipeline pipeline(config, data);
  const auto refit = ImputationStats::Fit(Split(data, config.split_seed).train);
  for (std::size_t j = 0; j < data.schema.num_features(); ++j)
    EXPECT_EQ(pipeline.imputation().fill(j), refit.fill(j));
  EXPECT_EQ(pipeline.train().size(), 120u);
  EXPECT_EQ(pipeline.val().size(), 40u);
  EXPECT_EQ(pipeline.test().size(), 40u);
  EXPECT_EQ(pipeline.input_dim(), 32u);
}

TEST(PipelineTest, StoreMissesSurfaceBeforeTraining) {
  TempDir dir;
  const std::vector<std::pair<std::string, Embedding>> entries = {{"unrelated", {1.0, 0.0}}};
  WriteStore(entries, dir / "s.cemb", true);
  auto config = TinyConfig();
  config.embedder.kind = EmbedderKind::kStore;
  config.embedder.store = dir / "s.cemb";
  EXPECT_THROW(InputPipeline(config, LoadConfiguredData(config)), DataError);
}

TEST(EvaluateTest, ConstantRankZeroOnBalancedSplitHasMaeTwo) {
  ModelSpec spec;
  spec.architecture = Architecture::kMlp;
  spec.encoder.input_dim = 3;
  spec.mlp_hidden = 4;
  RankModel model(spec);
  for (auto& p : model.parameters().items()) {
    if (p.name == "head.out.weight") std::fill(p.tensor.values().begin(), p.tensor.values().end(), 0.0);
    if (p.name == "head.out.bias")
      for (std::size_t k = 0; k < p.tensor.size(); ++k) p.tensor.values()[k] = k % 2 == 0 ? 1.0 : 0.0;
  }
  PreparedSplit split;
  for (int i = 0; i < 50; ++i) {
    split.inputs.push_back({1, 3, {0.1 * i, -0.2, 0.3}, {true}});
    split.labels.push_back(i % 5);
    split.ids.push_back(static_cast<std::size_t>(i));
  }
  const auto evaluation = Evaluate(model, split, 7);
  EXPECT_EQ(evaluation.predicted, std::vector<int>(50, 0));
  EXPECT_DOUBLE_EQ(evaluation.metrics.mae, 2.0);
  EXPECT_DOUBLE_EQ(evaluation.metrics.rmse, std::sqrt(6.0));
}

TEST(EvaluateTest, PerfectLabelsScoreZero) {
  const int labels[] = {0, 3, 4, 1};
  EXPECT_EQ(ComputeMetrics(labels, labels), (RankMetrics{0.0, 0.0}));
}

// ---- Training ----

TEST(TrainTest, SameSeedSameRun) {
  const auto config = TinyConfig();
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto a = TrainOneSeed(config, pipeline, 4);
  const auto b = TrainOneSeed(config, pipeline, 4);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].train_loss, b.history[e].train_loss);
    EXPECT_EQ(a.history[e].val, b.history[e].val);
  }
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(Flatten(a.model->parameters()), Flatten(b.model->parameters()));
  const auto c = TrainOneSeed(config, pipeline, 5);
  EXPECT_NE(Flatten(a.model->parameters()), Flatten(c.model->parameters()));
}

TEST(TrainTest, PatienceZeroStopsAtFirstNonImprovement) {
  auto config = TinyConfig();
  config.patience = 0;
  config.max_epochs = 40;
  config.learning_rate = 3e-2;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto result = TrainOneSeed(config, pipeline, seed);
    const auto& h = result.history;
    ASSERT_FALSE(h.empty());
    for (std::size_t e = 1; e + 1 < h.size(); ++e) EXPECT_LT(h[e].val.rmse, h[e - 1].val.rmse) << e;
    if (h.size() < config.max_epochs && h.size() > 1) {
      EXPECT_GE(h.back().val.rmse, h[h.size() - 2].val.rmse);
    }
  }
}

TEST(TrainTest, RestoredModelIsTheBestValidationEpoch) {
  auto config = TinyConfig();
  config.max_epochs = 20;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  TrainOptions options;
  options.round_to_float = false;
  const auto result = TrainOneSeed(config, pipeline, 2, options);
  double best = result.history.front().val.rmse;
  for (const auto& record : result.history) best = std::min(best, record.val.rmse);
  EXPECT_EQ(result.val.rmse, best);
  EXPECT_EQ(result.val, result.history.at(result.best_epoch).val);
  for (std::size_t e = 0; e < result.best_epoch; ++e) EXPECT_GT(result.history[e].val.rmse, best);
}

TEST(TrainTest, FiveSeedsGiveFivePairsAndTheirMean) {
  auto config = TinyConfig();
  config.max_epochs = 3;
  config.seeds = {0, 1, 2, 3, 4};
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto run = RunExperiment(config, pipeline);
  ASSERT_EQ(run.seeds.size(), 5u);
  double rmse = 0.0, mae = 0.0;
  for (const auto& s : run.seeds) rmse += s.test.rmse, mae += s.test.mae;
  EXPECT_NEAR(run.mean.rmse, rmse / 5.0, 1e-15);
  EXPECT_NEAR(run.mean.mae, mae / 5.0, 1e-15);
}

TEST(TrainTest, AverageIgnoresSeedOrder) {
  std::vector<std::pair<std::uint64_t, RankMetrics>> per_seed = {
      {0, {0.1, 0.3}}, {1, {0.7, 0.2}}, {2, {1e-17, 0.9}}, {3, {0.3333, 0.123}}, {4, {2.5, 1e17}}};
  const auto reference = AverageBySeed(per_seed);
  std::sort(per_seed.begin(), per_seed.end(), [](auto& a, auto& b) { return a.first > b.first; });
  EXPECT_EQ(AverageBySeed(per_seed), reference);
  std::swap(per_seed[1], per_seed[3]);
  EXPECT_EQ(AverageBySeed(per_seed), reference);
}

TEST(TrainTest, TextSignalIsLearnedByTheCellTransformer) {
  TrainConfig config;
  config.learning_rate = 1e-3;
  config.seeds = {0};
  config.encoder.model_dim = 32;
  config.encoder.layers = 2;
  config.encoder.heads = 2;
  config.embedder.dim = 64;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  ASSERT_EQ(pipeline.train().size(), 600u);
  const auto result = TrainOneSeed(config, pipeline, 0);
  EXPECT_LE(result.train.mae, 0.05);
}

TEST(TrainTest, MlpBaselineIsSeeded) {
  auto config = TinyConfig();
  config.model = Architecture::kMlp;
  config.max_epochs = 5;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  ASSERT_NE(pipeline.featurizer(), nullptr);
  EXPECT_EQ(pipeline.input_dim(), pipeline.featurizer()->width());
  const auto a = TrainOneSeed(config, pipeline, 1);
  const auto b = TrainOneSeed(config, pipeline, 1);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(Flatten(a.model->parameters()), Flatten(b.model->parameters()));
}

// ---- Corruption benchmark ----

TEST(CorruptionBenchmarkTest, SortedRowsAndRateZeroIsPlainEvaluation) {
  auto config = TinyConfig();
  config.max_epochs = 4;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto result = TrainOneSeed(config, pipeline, 0);
  const std::vector<double> rates = {0.2, 0.0, 0.1, 0.05, 0.15};
  const auto curve = CorruptionBenchmark(*result.model, pipeline, rates, 0);
  ASSERT_EQ(curve.size(), rates.size());
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LT(curve[i - 1].rate, curve[i].rate);
  EXPECT_EQ(curve[0].rate, 0.0);
  EXPECT_EQ(curve[0].corrupted_cells, 0u);
  EXPECT_EQ(curve[0].metrics, Evaluate(*result.model, pipeline.test()).metrics);
  EXPECT_EQ(curve[0].metrics, result.test);
  EXPECT_GT(curve.back().corrupted_cells, 0u);
  const auto again = CorruptionBenchmark(*result.model, pipeline, rates, 0);
  for (std::size_t i = 0; i < curve.size(); ++i) EXPECT_EQ(again[i].metrics, curve[i].metrics);
}

TEST(CorruptionBenchmarkTest, AverageCurvesIsPointwiseMean) {
  const std::vector<std::pair<std::uint64_t, std::vector<CurvePoint>>> curves = {
      {1, {{0.0, {1.0, 0.5}, 0}, {0.1, {2.0, 1.0}, 4}}},
      {0, {{0.0, {3.0, 1.5}, 0}, {0.1, {4.0, 2.0}, 6}}}};
  const auto mean = AverageCurves(curves);
  ASSERT_EQ(mean.size(), 2u);
  EXPECT_EQ(mean[0].metrics, (RankMetrics{2.0, 1.0}));
  EXPECT_EQ(mean[1].metrics, (RankMetrics{3.0, 1.5}));
}

// ---- Checkpoints and reports ----

TEST(CheckpointTest, RoundTripReproducesMetrics) {
  TempDir dir;
  auto config = TinyConfig();
  config.max_epochs = 3;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto result = TrainOneSeed(config, pipeline, 0);
  SaveCheckpoint(*result.model, dir / "m.ckpt", R"({"note": "x"})");
  const auto loaded = LoadCheckpoint(dir / "m.ckpt", &result.model->spec());
  EXPECT_EQ(loaded.model->spec(), result.model->spec());
  EXPECT_EQ(Flatten(loaded.model->parameters()), Flatten(result.model->parameters()));
  EXPECT_NE(loaded.metadata_json.find("note"), std::string::npos);
  EXPECT_EQ(Evaluate(*loaded.model, pipeline.test()).metrics, result.test);
}

TEST(CheckpointTest, RejectsMismatchesAndDamage) {
  TempDir dir;
  ModelSpec spec;
  spec.encoder.input_dim = 4;
  spec.encoder.model_dim = 4;
  spec.encoder.layers = 1;
  spec.encoder.heads = 2;
  const RankModel model(spec);
  SaveCheckpoint(model, dir / "m.ckpt");
  ModelSpec other = spec;
  other.head = HeadKind::kCrossEntropy;
  EXPECT_THROW(LoadCheckpoint(dir / "m.ckpt", &other), FormatError);
  EXPECT_NO_THROW(LoadCheckpoint(dir / "m.ckpt", &spec));

  std::ifstream in(dir / "m.ckpt", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream(dir / name, std::ios::binary) << content;
    return dir / name;
  };
  EXPECT_THROW(LoadCheckpoint(write("trunc.ckpt", bytes.substr(0, bytes.size() - 4))), FormatError);
  EXPECT_THROW(LoadCheckpoint(write("magic.ckpt", "XFCK1\n" + bytes.substr(6))), FormatError);
  EXPECT_THROW(LoadCheckpoint(write("extra.ckpt", bytes + "abcd")), FormatError);
  EXPECT_THROW(LoadCheckpoint(dir / "missing.ckpt"), Error);
}

TEST(ReportsTest, PredictionsCsvRecomputesMetrics) {
  auto config = TinyConfig();
  config.max_epochs = 3;
  config.seeds = {0, 1};
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto run = RunExperiment(config, pipeline);
  std::ostringstream out;
  WritePredictionsCsv(run, out);
  std::istringstream in(out.str());
  csv::Reader reader(in);
  const auto header = *reader.Next();
  EXPECT_EQ(header, (csv::Record{"seed", "id", "true_rank", "pred_rank", "p_0", "p_1", "p_2", "p_3"}));
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, int> counts;
  while (auto record = reader.Next()) {
    const int diff = std::stoi((*record)[2]) - std::stoi((*record)[3]);
    sums[(*record)[0]].first += diff * diff;
    sums[(*record)[0]].second += std::abs(diff);
    ++counts[(*record)[0]];
  }
  for (const auto& s : run.seeds) {
    const auto key = std::to_string(s.seed);
    ASSERT_EQ(counts[key], 40);
    EXPECT_NEAR(std::sqrt(sums[key].first / 40.0), s.test.rmse, 1e-12);
    EXPECT_NEAR(sums[key].second / 40.0, s.test.mae, 1e-12);
  }
}

TEST(ReportsTest, MetricsJsonIsStable) {
  auto config = TinyConfig();
  config.max_epochs = 2;
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto a = MetricsJson(config, RunExperiment(config, pipeline));
  const auto b = MetricsJson(config, RunExperiment(config, pipeline));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"mean\""), std::string::npos);
}

}  // namespace
}  // namespace cellformer
