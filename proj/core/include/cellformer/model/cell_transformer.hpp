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
#ifndef CELLFORMER_MODEL_CELL_TRANSFORMER_HPP_
#define CELLFORMER_MODEL_CELL_TRANSFORMER_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cellformer/autodiff/tensor.hpp"
#include "cellformer/embed/embedding.hpp"
#include "cellformer/model/parameters.hpp"

namespace cellformer {

struct EncoderConfig {
  std::size_t input_dim = 768;  // cell embedding width (store dim)
  std::size_t model_dim = 768;
  std::size_t layers = 6;
  std::size_t heads = 6;
  std::size_t ffn_dim = 0;  // 0 means 4 * model_dim
  bool adapter_trainable = true;
  double layer_norm_eps = 1e-5;

  std::size_t head_dim() const { return model_dim / heads; }
  std::size_t ffn_width() const { return ffn_dim ? ffn_dim : 4 * model_dim; }
  // Throws InvalidArgument unless every dim is >= 1 and heads divides model_dim.
  void Validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// Weights of one post-norm encoder layer. Each head owns its own
// model_dim x head_dim query, key and value projections.
struct EncoderLayerWeights {
  std::vector<ad::Tensor> query, key, value;
  ad::Tensor output;  // (heads * head_dim) x model_dim
  ad::Tensor norm1_gamma, norm1_beta;
  Linear ffn_in, ffn_out;
  ad::Tensor norm2_gamma, norm2_beta;
};

// Trainable adapter over frozen cell embeddings, a stack of self-attention
// layers with no positional encoding and no [CLS] row, and masked mean
// pooling over the cells that were present.
class CellTransformer {
 public:
  // Applied to the encoder output before pooling; lets tests tamper with rows.
  using PoolingHook = std::function<ad::Tensor(const ad::Tensor&)>;

  // Registers parameters under `prefix` and initialises them from `rng`.
  CellTransformer(const EncoderConfig& config, ParameterSet& params, Rng& rng,
                  const std::string& prefix = "encoder");

  const EncoderConfig& config() const { return config_; }

  // m x input_dim -> m x model_dim, shared across cells.
  ad::Tensor Adapt(const ad::Tensor& cells) const;

  // One encoder layer on m x model_dim. When `attention` is non-null, the
  // m x m attention weights of every head are appended to it.
  ad::Tensor Layer(std::size_t index, const ad::Tensor& z,
                   std::vector<ad::Tensor>* attention = nullptr) const;

  // Adapter followed by every layer.
  ad::Tensor Encode(const ad::Tensor& cells) const;

  // Patient embedding: mean of the encoder output rows whose mask is true.
  ad::Tensor Forward(const ad::Tensor& cells, const std::vector<bool>& mask,
                     const PoolingHook& hook = nullptr) const;
  ad::Tensor Forward(const EmbeddedSample& sample) const;

  const Linear& adapter() const { return adapter_; }
  const EncoderLayerWeights& layer(std::size_t i) const { return layers_.at(i); }

 private:
  EncoderConfig config_;
  Linear adapter_;
  std::vector<EncoderLayerWeights> layers_;
};

// Constant m x dim tensor holding the sample's cell embeddings.
ad::Tensor CellMatrix(const EmbeddedSample& sample);

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_CELL_TRANSFORMER_HPP_
