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
#ifndef CELLFORMER_MODEL_RANK_MODEL_HPP_
#define CELLFORMER_MODEL_RANK_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/autodiff/tensor.hpp"
#include "cellformer/embed/embedding.hpp"
#include "cellformer/model/cell_transformer.hpp"
#include "cellformer/model/heads.hpp"
#include "cellformer/model/parameters.hpp"

namespace cellformer {

enum class Architecture {
  kCellTransformer,  // adapter + encoder + masked pooling over cell embeddings
  kMlp,              // two ReLU layers over a single numeric feature row
};

std::string_view ArchitectureName(Architecture a);
// "cellformer", "mlp"
Architecture ParseArchitecture(std::string_view name);

struct ModelSpec {
  Architecture architecture = Architecture::kCellTransformer;
  // For the MLP only input_dim is read; its hidden width is mlp_hidden.
  EncoderConfig encoder;
  std::size_t mlp_hidden = 64;
  HeadKind head = HeadKind::kOrdinal;
  std::size_t head_hidden = 0;  // 0 means the backbone output width
  int num_ranks = 5;
  std::uint64_t init_seed = 0;

  std::size_t input_dim() const { return encoder.input_dim; }
  std::size_t backbone_dim() const;
  void Validate() const;

  std::string ToJson() const;
  static ModelSpec FromJson(std::string_view json);
  bool operator==(const ModelSpec&) const = default;
};

// Backbone plus ordinal head. Every parameter is registered in one
// ParameterSet in a fixed order, so two models built from equal specs have
// identical manifests and, with equal init seeds, identical values.
class RankModel {
 public:
  explicit RankModel(const ModelSpec& spec);
  RankModel(const RankModel&) = delete;
  RankModel& operator=(const RankModel&) = delete;

  const ModelSpec& spec() const { return spec_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const CellTransformer* encoder() const { return encoder_.get(); }
  const RankHead& head() const { return *head_; }

  // Patient embedding of one sample. MLP inputs are single-row samples.
  ad::Tensor Embed(const EmbeddedSample& sample) const;
  // N x head().output_width() raw outputs for a batch.
  ad::Tensor Forward(std::span<const EmbeddedSample* const> batch) const;
  ad::Tensor Loss(const ad::Tensor& outputs, std::span<const int> labels) const {
    return head_->Loss(outputs, labels);
  }
  std::vector<int> Decode(const ad::Tensor& outputs) const { return head_->Decode(outputs); }

 private:
  ModelSpec spec_;
  ParameterSet params_;
  std::unique_ptr<CellTransformer> encoder_;
  Linear mlp_first_, mlp_second_;
  std::unique_ptr<RankHead> head_;
};

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_RANK_MODEL_HPP_
