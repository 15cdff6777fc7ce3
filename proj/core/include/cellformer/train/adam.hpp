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
#ifndef CELLFORMER_TRAIN_ADAM_HPP_
#define CELLFORMER_TRAIN_ADAM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "cellformer/model/parameters.hpp"

namespace cellformer {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// One bias-corrected Adam update of `values` in place. An empty `grads` span
// is treated as all zeros. Throws ShapeError when the sizes disagree.
void AdamStep(std::span<double> values, std::span<const double> grads, AdamMoments& state,
              const AdamOptions& options);

// Adam over every trainable parameter of a set. Non-trainable parameters are
// never touched.
class Adam {
 public:
  Adam(ParameterSet& params, AdamOptions options);

  void Step();
  std::size_t steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }

 private:
  ParameterSet& params_;
  AdamOptions options_;
  std::vector<AdamMoments> moments_;
  std::size_t steps_ = 0;
};

}  // namespace cellformer

#endif  // CELLFORMER_TRAIN_ADAM_HPP_
