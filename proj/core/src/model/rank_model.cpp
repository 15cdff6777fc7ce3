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
#include "cellformer/model/rank_model.hpp"

#include <nlohmann/json.hpp>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/error.hpp"

namespace cellformer {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;

}  // namespace

std::string_view ArchitectureName(Architecture a) {
  return a == Architecture::kMlp ? "mlp" : "cellformer";
}

Architecture ParseArchitecture(std::string_view name) {
  if (name == "cellformer") return Architecture::kCellTransformer;
  if (name == "mlp") return Architecture::kMlp;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (expected cellformer, mlp)");
}

std::size_t ModelSpec::backbone_dim() const {
  return architecture == Architecture::kMlp ? mlp_hidden : encoder.model_dim;
}

void ModelSpec::Validate() const {
  if (architecture == Architecture::kCellTransformer) encoder.Validate();
  if (encoder.input_dim == 0) throw InvalidArgument("model input_dim must be >= 1");
  if (architecture == Architecture::kMlp && mlp_hidden == 0) {
    throw InvalidArgument("mlp_hidden must be >= 1");
  }
  if (num_ranks < 2) throw InvalidArgument("a model needs K >= 2 ranks");
}

std::string ModelSpec::ToJson() const {
  nlohmann::ordered_json j;
  j["architecture"] = ArchitectureName(architecture);
  j["encoder"] = {{"input_dim", encoder.input_dim},
                  {"model_dim", encoder.model_dim},
                  {"layers", encoder.layers},
                  {"heads", encoder.heads},
                  {"ffn_dim", encoder.ffn_dim},
                  {"adapter_trainable", encoder.adapter_trainable},
                  {"layer_norm_eps", encoder.layer_norm_eps}};
  j["mlp_hidden"] = mlp_hidden;
  j["head"] = HeadName(head);
  j["head_hidden"] = head_hidden;
  j["num_ranks"] = num_ranks;
  j["init_seed"] = init_seed;
  return j.dump();
}

ModelSpec ModelSpec::FromJson(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    ModelSpec spec;
    spec.architecture = ParseArchitecture(j.at("architecture").get<std::string>());
    const auto& e = j.at("encoder");
    spec.encoder.input_dim = e.at("input_dim").get<std::size_t>();
    spec.encoder.model_dim = e.at("model_dim").get<std::size_t>();
    spec.encoder.layers = e.at("layers").get<std::size_t>();
    spec.encoder.heads = e.at("heads").get<std::size_t>();
    spec.encoder.ffn_dim = e.at("ffn_dim").get<std::size_t>();
    spec.encoder.adapter_trainable = e.at("adapter_trainable").get<bool>();
    spec.encoder.layer_norm_eps = e.at("layer_norm_eps").get<double>();
    spec.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    spec.head = ParseHead(j.at("head").get<std::string>());
    spec.head_hidden = j.at("head_hidden").get<std::size_t>();
    spec.num_ranks = j.at("num_ranks").get<int>();
    spec.init_seed = j.at("init_seed").get<std::uint64_t>();
    spec.Validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model spec: ") + e.what());
  }
}

RankModel::RankModel(const ModelSpec& spec) : spec_(spec) {
  spec_.Validate();
  Rng rng(DeriveSeed(spec_.init_seed, kInitStream));
  if (spec_.architecture == Architecture::kCellTransformer) {
    encoder_ = std::make_unique<CellTransformer>(spec_.encoder, params_, rng, "encoder");
  } else {
    mlp_first_ = Linear::Create(params_, "mlp.first", spec_.input_dim(), spec_.mlp_hidden, rng);
    mlp_second_ = Linear::Create(params_, "mlp.second", spec_.mlp_hidden, spec_.mlp_hidden, rng);
  }
  const std::size_t width = spec_.backbone_dim();
  head_ = std::make_unique<RankHead>(spec_.head, width, spec_.head_hidden ? spec_.head_hidden : width,
                                     spec_.num_ranks, params_, rng, "head");
}

ad::Tensor RankModel::Embed(const EmbeddedSample& sample) const {
  if (sample.dim != spec_.input_dim()) {
    throw ShapeError("model expects input width " + std::to_string(spec_.input_dim()) + ", got " +
                     std::to_string(sample.dim));
  }
  if (encoder_) return encoder_->Forward(sample);
  if (sample.rows != 1) {
    throw ShapeError("MLP input must be a single feature row, got " + std::to_string(sample.rows));
  }
  const auto x = CellMatrix(sample);
  return ad::Relu(mlp_second_(ad::Relu(mlp_first_(x))));
}

ad::Tensor RankModel::Forward(std::span<const EmbeddedSample* const> batch) const {
  if (batch.empty()) throw InvalidArgument("forward needs a non-empty batch");
  std::vector<ad::Tensor> patients;
  patients.reserve(batch.size());
  for (const auto* sample : batch) patients.push_back(Embed(*sample));
  return head_->Forward(ad::ConcatRows(patients));
}

}  // namespace cellformer
