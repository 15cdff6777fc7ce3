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
#include "cellformer/model/parameters.hpp"

#include <cmath>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/error.hpp"

namespace cellformer {

ad::Tensor ParameterSet::Add(std::string name, ad::Shape shape, std::vector<double> values,
                             bool trainable) {
  if (Find(name)) throw InvalidArgument("duplicate parameter name '" + name + "'");
  auto tensor = ad::Tensor::Variable(std::move(shape), std::move(values));
  items_.push_back({std::move(name), tensor, trainable});
  return tensor;
}

ad::Tensor ParameterSet::AddUniform(std::string name, ad::Shape shape, std::size_t fan_in, Rng& rng,
                                    bool trainable) {
  const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::vector<double> values(ad::ShapeSize(shape));
  for (auto& v : values) v = rng.Uniform(-limit, limit);
  return Add(std::move(name), std::move(shape), std::move(values), trainable);
}

ad::Tensor ParameterSet::AddConstantFill(std::string name, ad::Shape shape, double value,
                                         bool trainable) {
  std::vector<double> values(ad::ShapeSize(shape), value);
  return Add(std::move(name), std::move(shape), std::move(values), trainable);
}

const Parameter* ParameterSet::Find(const std::string& name) const {
  for (const auto& p : items_)
    if (p.name == name) return &p;
  return nullptr;
}

std::size_t ParameterSet::NumScalars() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.tensor.size();
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto& p : items_) p.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterSet::Snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void ParameterSet::Restore(const std::vector<std::vector<double>>& snapshot) {
  if (snapshot.size() != items_.size()) throw InvalidArgument("snapshot has the wrong parameter count");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    auto values = items_[i].tensor.values();
    if (snapshot[i].size() != values.size()) {
      throw InvalidArgument("snapshot size mismatch for '" + items_[i].name + "'");
    }
    std::copy(snapshot[i].begin(), snapshot[i].end(), values.begin());
  }
}

void ParameterSet::RoundToFloat() {
  for (auto& p : items_)
    for (auto& v : p.tensor.values()) v = static_cast<double>(static_cast<float>(v));
}

Linear Linear::Create(ParameterSet& params, const std::string& name, std::size_t in,
                      std::size_t out, Rng& rng, bool trainable) {
  Linear layer;
  layer.weight = params.AddUniform(name + ".weight", {in, out}, in, rng, trainable);
  layer.bias = params.AddConstantFill(name + ".bias", {out}, 0.0, trainable);
  return layer;
}

ad::Tensor Linear::operator()(const ad::Tensor& x) const {
  return ad::AddRowBroadcast(ad::MatMul(x, weight), bias);
}

}  // namespace cellformer
