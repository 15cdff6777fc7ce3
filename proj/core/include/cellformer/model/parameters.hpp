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
#ifndef CELLFORMER_MODEL_PARAMETERS_HPP_
#define CELLFORMER_MODEL_PARAMETERS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "cellformer/autodiff/tensor.hpp"
#include "cellformer/random.hpp"

namespace cellformer {

struct Parameter {
  std::string name;
  ad::Tensor tensor;
  bool trainable = true;
};

// Named leaf tensors in registration order. Names are unique.
class ParameterSet {
 public:
  ad::Tensor Add(std::string name, ad::Shape shape, std::vector<double> values,
                 bool trainable = true);
  // uniform(-sqrt(1/fan_in), +sqrt(1/fan_in))
  ad::Tensor AddUniform(std::string name, ad::Shape shape, std::size_t fan_in, Rng& rng,
                        bool trainable = true);
  ad::Tensor AddConstantFill(std::string name, ad::Shape shape, double value, bool trainable = true);

  std::vector<Parameter>& items() { return items_; }
  const std::vector<Parameter>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const Parameter* Find(const std::string& name) const;
  std::size_t NumScalars() const;

  void ZeroGrad();
  // Deep copy of all values, for best-epoch snapshots.
  std::vector<std::vector<double>> Snapshot() const;
  void Restore(const std::vector<std::vector<double>>& snapshot);
  // Rounds every value to the nearest 32-bit float.
  void RoundToFloat();

 private:
  std::vector<Parameter> items_;
};

// x W + b over rows; W is in x out, b has length out.
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;

  static Linear Create(ParameterSet& params, const std::string& name, std::size_t in,
                       std::size_t out, Rng& rng, bool trainable = true);
  ad::Tensor operator()(const ad::Tensor& x) const;
};

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_PARAMETERS_HPP_
