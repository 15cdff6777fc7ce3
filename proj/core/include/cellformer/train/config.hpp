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
#ifndef CELLFORMER_TRAIN_CONFIG_HPP_
#define CELLFORMER_TRAIN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/embed/embedding.hpp"
#include "cellformer/model/cell_transformer.hpp"
#include "cellformer/model/heads.hpp"
#include "cellformer/model/rank_model.hpp"

namespace cellformer {

enum class EmbedderKind { kHash, kStore };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kHash;
  std::size_t dim = 768;  // hash embedder only; a store carries its own dim
  std::uint64_t seed = 0;
  std::filesystem::path store;

  // Opens the store or builds the hash embedder.
  std::shared_ptr<const EmbeddingProvider> Create() const;
};

// Synthetic data source used when no CSV path is configured.
struct SynthConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string variant = "text";  // "text" or "tabular"
  double missing_text_fraction = 0.3;
};

struct TrainConfig {
  Architecture model = Architecture::kCellTransformer;
  HeadKind head = HeadKind::kOrdinal;
  std::optional<double> learning_rate;  // unset means the per-head default
  std::size_t batch_size = 60;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::uint64_t split_seed = 0;
  // input_dim is overwritten with the embedder width when a run starts.
  EncoderConfig encoder;
  std::size_t head_hidden = 0;  // 0 means the backbone output width
  std::size_t mlp_hidden = 64;
  EmbedderConfig embedder;
  std::filesystem::path data;    // CSV; empty means synthesize
  std::filesystem::path schema;  // required with `data`
  SynthConfig synth;
  std::vector<double> rates = {0.0, 0.05, 0.1, 0.15, 0.2};
  std::filesystem::path out_dir;  // empty means the caller picks a default

  // 1e-5 for CE and OR, 5e-5 for CORAL unless overridden.
  double lr() const;
  // Throws InvalidArgument on non-positive sizes, an empty seed list, a
  // rate outside [0, 1], or a CSV path without a schema.
  void Validate() const;

  // Resolved configuration. Paths are written as given; `out_dir` is left out
  // unless requested so that result files do not depend on where they land.
  std::string ToJson(bool include_out_dir = false) const;
  // Relative paths are resolved against `base_dir`. Unknown keys are an error.
  static TrainConfig FromJson(std::string_view json, const std::filesystem::path& base_dir = {});
  static TrainConfig Load(const std::filesystem::path& path);
};

// Parses "0,1,2" or "0-4" style lists.
std::vector<std::uint64_t> ParseSeedList(std::string_view text);
std::vector<double> ParseRateList(std::string_view text);

}  // namespace cellformer

#endif  // CELLFORMER_TRAIN_CONFIG_HPP_
