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
#ifndef CELLFORMER_TRAIN_EXPERIMENT_HPP_
#define CELLFORMER_TRAIN_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cellformer/data/dataset.hpp"
#include "cellformer/embed/embedding.hpp"
#include "cellformer/model/metrics.hpp"
#include "cellformer/model/rank_model.hpp"
#include "cellformer/train/config.hpp"
#include "cellformer/train/featurize.hpp"

namespace cellformer {

// Model-ready inputs of one split, aligned by index.
struct PreparedSplit {
  std::vector<EmbeddedSample> inputs;
  std::vector<int> labels;
  std::vector<std::size_t> ids;  // Row::id of each record
  std::size_t size() const { return inputs.size(); }
};

// The configured CSV, or a synthetic dataset when no CSV is set.
Dataset LoadConfiguredData(const TrainConfig& config);

// The three splits, each imputed with statistics fitted on the training
// split. This is exactly what the pipeline renders, so a prompt dump of
// these datasets covers every sentence training and evaluation will embed.
Splits ImputedSplits(const Dataset& data, std::uint64_t split_seed);

// Split, imputation fitted on the training split, then prompt rendering and
// embedding (cell transformer) or numeric featurisation (MLP). All three
// splits are prepared in the constructor so that store misses surface before
// any training starts.
class InputPipeline {
 public:
  InputPipeline(const TrainConfig& config, const Dataset& data);

  const Splits& splits() const { return splits_; }
  const ImputationStats& imputation() const { return imputation_; }
  std::size_t input_dim() const { return input_dim_; }
  int num_ranks() const { return num_ranks_; }
  const NumericFeaturizer* featurizer() const { return featurizer_ ? &*featurizer_ : nullptr; }

  // Imputes `raw` with the training statistics and builds model inputs.
  PreparedSplit Prepare(const Dataset& raw) const;

  const PreparedSplit& train() const { return train_; }
  const PreparedSplit& val() const { return val_; }
  const PreparedSplit& test() const { return test_; }

 private:
  Splits splits_;
  ImputationStats imputation_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::optional<NumericFeaturizer> featurizer_;
  std::size_t input_dim_ = 0;
  int num_ranks_ = 0;
  PreparedSplit train_, val_, test_;
};

struct Evaluation {
  RankMetrics metrics;
  std::vector<std::size_t> ids;
  std::vector<int> truth;
  std::vector<int> predicted;
  // Class probabilities (CE) or per-task probabilities (OR, CORAL).
  std::vector<std::vector<double>> probabilities;
  // CORAL only: every probability row was non-increasing.
  bool rank_consistent = true;
};

// Forward passes without gradient tracking; decodes per the head rule.
Evaluation Evaluate(const RankModel& model, const PreparedSplit& split, std::size_t batch_size = 128);

struct EpochRecord {
  std::size_t epoch = 0;  // 0-based
  double train_loss = 0.0;  // sample-weighted mean over the epoch's batches
  RankMetrics val;
};

struct TrainOptions {
  // Round restored parameters to 32-bit floats before the final evaluation,
  // so a saved checkpoint reproduces the reported metrics exactly.
  bool round_to_float = true;
  std::function<void(std::uint64_t seed, const EpochRecord&)> on_epoch;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  RankMetrics train, val, test;
  Evaluation test_eval;
  std::unique_ptr<RankModel> model;
};

ModelSpec MakeModelSpec(const TrainConfig& config, std::size_t input_dim, int num_ranks,
                        std::uint64_t seed);

// Seeded shuffles, mini-batches (last partial batch kept), Adam, validation
// RMSE after every epoch, early stopping after `patience` consecutive
// epochs without a strict improvement, best-epoch restore.
SeedResult TrainOneSeed(const TrainConfig& config, const InputPipeline& pipeline, std::uint64_t seed,
                        const TrainOptions& options = {});

struct RunResult {
  std::vector<SeedResult> seeds;  // in configured order
  RankMetrics mean;               // test metrics averaged over seeds
};

// Mean of per-seed metrics, summed in ascending seed order so the result
// does not depend on the order seeds were listed or finished in.
RankMetrics AverageBySeed(std::span<const std::pair<std::uint64_t, RankMetrics>> per_seed);

RunResult RunExperiment(const TrainConfig& config, const InputPipeline& pipeline,
                        const TrainOptions& options = {});

struct CurvePoint {
  double rate = 0.0;
  RankMetrics metrics;
  std::size_t corrupted_cells = 0;
};

// Corrupts the raw test split at each rate (seeded), re-imputes with the
// training statistics, and evaluates. Rows come back sorted by rate.
std::vector<CurvePoint> CorruptionBenchmark(const RankModel& model, const InputPipeline& pipeline,
                                            std::span<const double> rates, std::uint64_t seed);

// Point-wise mean of per-seed curves that share the same rates.
std::vector<CurvePoint> AverageCurves(std::span<const std::pair<std::uint64_t, std::vector<CurvePoint>>> curves);

}  // namespace cellformer

#endif  // CELLFORMER_TRAIN_EXPERIMENT_HPP_
