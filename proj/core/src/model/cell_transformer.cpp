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
#include "cellformer/model/cell_transformer.hpp"

#include <cmath>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/error.hpp"

namespace cellformer {

void EncoderConfig::Validate() const {
  if (input_dim == 0 || model_dim == 0 || layers == 0 || heads == 0) {
    throw InvalidArgument("encoder dimensions, layer count and head count must be >= 1");
  }
  if (model_dim % heads != 0) {
    throw InvalidArgument("model_dim " + std::to_string(model_dim) + " is not divisible by " +
                          std::to_string(heads) + " heads");
  }
}

CellTransformer::CellTransformer(const EncoderConfig& config, ParameterSet& params, Rng& rng,
                                 const std::string& prefix)
    : config_(config) {
  config_.Validate();
  const std::size_t d = config_.model_dim;
  const std::size_t dk = config_.head_dim();
  const std::size_t ffn = config_.ffn_width();
  adapter_ = Linear::Create(params, prefix + ".adapter", config_.input_dim, d, rng,
                            config_.adapter_trainable);
  layers_.resize(config_.layers);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    auto& w = layers_[l];
    const std::string base = prefix + ".layers." + std::to_string(l);
    for (std::size_t h = 0; h < config_.heads; ++h) {
      const std::string head = base + ".attn.head" + std::to_string(h);
      w.query.push_back(params.AddUniform(head + ".query", {d, dk}, d, rng));
      w.key.push_back(params.AddUniform(head + ".key", {d, dk}, d, rng));
      w.value.push_back(params.AddUniform(head + ".value", {d, dk}, d, rng));
    }
    w.output = params.AddUniform(base + ".attn.output", {config_.heads * dk, d}, config_.heads * dk, rng);
    w.norm1_gamma = params.AddConstantFill(base + ".norm1.gamma", {d}, 1.0);
    w.norm1_beta = params.AddConstantFill(base + ".norm1.beta", {d}, 0.0);
    w.ffn_in = Linear::Create(params, base + ".ffn.in", d, ffn, rng);
    w.ffn_out = Linear::Create(params, base + ".ffn.out", ffn, d, rng);
    w.norm2_gamma = params.AddConstantFill(base + ".norm2.gamma", {d}, 1.0);
    w.norm2_beta = params.AddConstantFill(base + ".norm2.beta", {d}, 0.0);
  }
}

ad::Tensor CellTransformer::Adapt(const ad::Tensor& cells) const {
  if (cells.cols() != config_.input_dim) {
    throw ShapeError("adapter expects " + std::to_string(config_.input_dim) +
                     " input columns, got shape " + ad::ShapeString(cells.shape()));
  }
  return adapter_(cells);
}

ad::Tensor CellTransformer::Layer(std::size_t index, const ad::Tensor& z,
                                  std::vector<ad::Tensor>* attention) const {
  const auto& w = layers_.at(index);
  if (z.cols() != config_.model_dim) {
    throw ShapeError("encoder layer expects " + std::to_string(config_.model_dim) +
                     " columns, got shape " + ad::ShapeString(z.shape()));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.head_dim()));
  std::vector<ad::Tensor> heads;
  heads.reserve(config_.heads);
  for (std::size_t h = 0; h < config_.heads; ++h) {
    const auto q = ad::MatMul(z, w.query[h]);
    const auto k = ad::MatMul(z, w.key[h]);
    const auto v = ad::MatMul(z, w.value[h]);
    const auto weights = ad::SoftmaxRows(ad::Scale(ad::MatMul(q, ad::Transpose(k)), scale));
    if (attention) attention->push_back(weights);
    heads.push_back(ad::MatMul(weights, v));
  }
  const auto attended = ad::MatMul(ad::ConcatCols(heads), w.output);
  const auto u = ad::LayerNormRows(ad::Add(attended, z), w.norm1_gamma, w.norm1_beta,
                                   config_.layer_norm_eps);
  const auto ffn = w.ffn_out(ad::Relu(w.ffn_in(u)));
  return ad::LayerNormRows(ad::Add(ffn, u), w.norm2_gamma, w.norm2_beta, config_.layer_norm_eps);
}

ad::Tensor CellTransformer::Encode(const ad::Tensor& cells) const {
  auto z = Adapt(cells);
  for (std::size_t l = 0; l < layers_.size(); ++l) z = Layer(l, z);
  return z;
}

ad::Tensor CellTransformer::Forward(const ad::Tensor& cells, const std::vector<bool>& mask,
                                    const PoolingHook& hook) const {
  auto encoded = Encode(cells);
  if (hook) encoded = hook(encoded);
  return ad::MaskedMeanRows(encoded, mask);
}

ad::Tensor CellTransformer::Forward(const EmbeddedSample& sample) const {
  return Forward(CellMatrix(sample), sample.mask);
}

ad::Tensor CellMatrix(const EmbeddedSample& sample) {
  return ad::Tensor::Constant({sample.rows, sample.dim}, sample.matrix);
}

}  // namespace cellformer
