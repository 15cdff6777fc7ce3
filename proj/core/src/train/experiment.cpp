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
#include "cellformer/train/experiment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cellformer/autodiff/tensor.hpp"
#include "cellformer/error.hpp"
#include "cellformer/prompt/render.hpp"
#include "cellformer/random.hpp"
#include "cellformer/train/adam.hpp"

namespace cellformer {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5AFF1E;
constexpr std::uint64_t kBenchStream = 0xBE7C;

std::vector<const EmbeddedSample*> Gather(const PreparedSplit& split, std::span<const std::size_t> index) {
  std::vector<const EmbeddedSample*> out;
  out.reserve(index.size());
  for (auto i : index) out.push_back(&split.inputs[i]);
  return out;
}

}  // namespace

Dataset LoadConfiguredData(const TrainConfig& config) {
  if (!config.data.empty()) return LoadDataset(config.data, config.schema);
  SynthOptions options;
  options.n = config.synth.n;
  options.seed = config.synth.seed;
  options.variant = config.synth.variant == "tabular" ? SynthVariant::kTabularSignal : SynthVariant::kTextSignal;
  options.missing_text_fraction = config.synth.missing_text_fraction;
  return Synthesize(options);
}

Splits ImputedSplits(const Dataset& data, std::uint64_t split_seed) {
  const auto raw = Split(data, split_seed);
  const auto stats = ImputationStats::Fit(raw.train);
  return {stats.Apply(raw.train), stats.Apply(raw.val), stats.Apply(raw.test)};
}

InputPipeline::InputPipeline(const TrainConfig& config, const Dataset& data)
    : splits_(Split(data, config.split_seed)),
      imputation_(ImputationStats::Fit(splits_.train)),
      num_ranks_(static_cast<int>(data.schema.num_ranks())) {
  if (config.model == Architecture::kCellTransformer) {
    provider_ = config.embedder.Create();
    input_dim_ = provider_->dim();
  } else {
    featurizer_ = NumericFeaturizer::Fit(imputation_.Apply(splits_.train));
    input_dim_ = featurizer_->width();
  }
  train_ = Prepare(splits_.train);
  val_ = Prepare(splits_.val);
  test_ = Prepare(splits_.test);
}

PreparedSplit InputPipeline::Prepare(const Dataset& raw) const {
  const Dataset data = imputation_.Apply(raw);
  PreparedSplit out;
  out.inputs.reserve(data.size());
  out.labels = data.Ranks();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data.rows[i];
    out.ids.push_back(row.id);
    if (featurizer_) {
      out.inputs.push_back(featurizer_->TransformSample(row));
    } else {
      const auto prompted = RenderSample(data.schema, row.cells, row.id + 1);
      if (std::none_of(prompted.presence.begin(), prompted.presence.end(), [](bool b) { return b; })) {
        throw DataError("every cell is missing; nothing to pool", row.id + 1);
      }
      out.inputs.push_back(EmbedSample(*provider_, prompted, row.id + 1));
    }
  }
  return out;
}

Evaluation Evaluate(const RankModel& model, const PreparedSplit& split, std::size_t batch_size) {
  if (split.size() == 0) throw InvalidArgument("cannot evaluate an empty split");
  ad::NoGradGuard no_grad;
  Evaluation e;
  e.ids = split.ids;
  e.truth = split.labels;
  std::vector<std::size_t> index(split.size());
  std::iota(index.begin(), index.end(), 0);
  for (std::size_t begin = 0; begin < split.size(); begin += batch_size) {
    const std::size_t count = std::min(batch_size, split.size() - begin);
    const auto batch = Gather(split, std::span(index).subspan(begin, count));
    const auto outputs = model.Forward(batch);
    const auto decoded = model.Decode(outputs);
    e.predicted.insert(e.predicted.end(), decoded.begin(), decoded.end());
    for (auto& p : model.head().Probabilities(outputs)) {
      if (model.head().kind() == HeadKind::kCoral && !std::is_sorted(p.rbegin(), p.rend())) {
        e.rank_consistent = false;
      }
      e.probabilities.push_back(std::move(p));
    }
  }
  e.metrics = ComputeMetrics(e.predicted, e.truth);
  return e;
}

ModelSpec MakeModelSpec(const TrainConfig& config, std::size_t input_dim, int num_ranks,
                        std::uint64_t seed) {
  ModelSpec spec;
  spec.architecture = config.model;
  spec.encoder = config.encoder;
  spec.encoder.input_dim = input_dim;
  spec.mlp_hidden = config.mlp_hidden;
  spec.head = config.head;
  spec.head_hidden = config.head_hidden;
  spec.num_ranks = num_ranks;
  spec.init_seed = seed;
  return spec;
}

SeedResult TrainOneSeed(const TrainConfig& config, const InputPipeline& pipeline, std::uint64_t seed,
                        const TrainOptions& options) {
  config.Validate();
  const auto& train = pipeline.train();
  if (train.size() == 0 || pipeline.val().size() == 0 || pipeline.test().size() == 0) {
    throw InvalidArgument("training needs non-empty train, val and test splits");
  }
  SeedResult result;
  result.seed = seed;
  result.model = std::make_unique<RankModel>(
      MakeModelSpec(config, pipeline.input_dim(), pipeline.num_ranks(), seed));
  auto& model = *result.model;
  auto& params = model.parameters();
  Adam adam(params, AdamOptions{.learning_rate = config.lr()});
  Rng shuffle_rng(DeriveSeed(seed, kShuffleStream));

  double best_rmse = std::numeric_limits<double>::infinity();
  auto best = params.Snapshot();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::vector<int> labels;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.Shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - begin);
      const auto index = std::span(order).subspan(begin, count);
      labels.clear();
      for (auto i : index) labels.push_back(train.labels[i]);
      params.ZeroGrad();
      const auto loss = model.Loss(model.Forward(Gather(train, index)), labels);
      loss.backward();
      adam.Step();
      loss_sum += loss.item() * static_cast<double>(count);
    }
    EpochRecord record{epoch, loss_sum / static_cast<double>(train.size()),
                       Evaluate(model, pipeline.val()).metrics};
    result.history.push_back(record);
    if (options.on_epoch) options.on_epoch(seed, record);
    if (record.val.rmse < best_rmse) {
      best_rmse = record.val.rmse;
      best = params.Snapshot();
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  params.Restore(best);
  if (options.round_to_float) params.RoundToFloat();
  result.train = Evaluate(model, train).metrics;
  result.val = Evaluate(model, pipeline.val()).metrics;
  result.test_eval = Evaluate(model, pipeline.test());
  result.test = result.test_eval.metrics;
  return result;
}

RankMetrics AverageBySeed(std::span<const std::pair<std::uint64_t, RankMetrics>> per_seed) {
  if (per_seed.empty()) throw InvalidArgument("cannot average zero seeds");
  std::vector<std::pair<std::uint64_t, RankMetrics>> sorted(per_seed.begin(), per_seed.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  RankMetrics mean;
  for (const auto& [seed, m] : sorted) {
    mean.rmse += m.rmse;
    mean.mae += m.mae;
  }
  mean.rmse /= static_cast<double>(sorted.size());
  mean.mae /= static_cast<double>(sorted.size());
  return mean;
}

RunResult RunExperiment(const TrainConfig& config, const InputPipeline& pipeline,
                        const TrainOptions& options) {
  config.Validate();
  RunResult run;
  std::vector<std::pair<std::uint64_t, RankMetrics>> per_seed;
  for (auto seed : config.seeds) {
    run.seeds.push_back(TrainOneSeed(config, pipeline, seed, options));
    per_seed.emplace_back(seed, run.seeds.back().test);
  }
  run.mean = AverageBySeed(per_seed);
  return run;
}

std::vector<CurvePoint> CorruptionBenchmark(const RankModel& model, const InputPipeline& pipeline,
                                            std::span<const double> rates, std::uint64_t seed) {
  if (rates.empty()) throw InvalidArgument("corruption benchmark needs at least one rate");
  std::vector<double> sorted(rates.begin(), rates.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> curve;
  for (double rate : sorted) {
    const auto corrupted = Corrupt(pipeline.splits().test, rate, DeriveSeed(seed, kBenchStream));
    const auto evaluation = Evaluate(model, pipeline.Prepare(corrupted.data));
    curve.push_back({rate, evaluation.metrics, corrupted.num_corrupted()});
  }
  return curve;
}

std::vector<CurvePoint> AverageCurves(
    std::span<const std::pair<std::uint64_t, std::vector<CurvePoint>>> curves) {
  if (curves.empty()) throw InvalidArgument("cannot average zero curves");
  const auto& first = curves.front().second;
  std::vector<CurvePoint> mean(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::vector<std::pair<std::uint64_t, RankMetrics>> per_seed;
    std::size_t corrupted = 0;
    for (const auto& [seed, curve] : curves) {
      if (curve.size() != first.size() || curve[i].rate != first[i].rate) {
        throw InvalidArgument("curves to average must share the same rates");
      }
      per_seed.emplace_back(seed, curve[i].metrics);
      corrupted += curve[i].corrupted_cells;
    }
    mean[i] = {first[i].rate, AverageBySeed(per_seed), corrupted / curves.size()};
  }
  return mean;
}

}  // namespace cellformer
