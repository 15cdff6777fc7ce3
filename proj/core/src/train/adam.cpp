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
#include "cellformer/train/adam.hpp"

#include <cmath>
#include <string>

#include "cellformer/error.hpp"

namespace cellformer {

void AdamStep(std::span<double> values, std::span<const double> grads, AdamMoments& state,
              const AdamOptions& options) {
  if (!grads.empty() && grads.size() != values.size()) {
    throw ShapeError("Adam: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(values.size()) + " values");
  }
  if (state.m.empty()) {
    state.m.assign(values.size(), 0.0);
    state.v.assign(values.size(), 0.0);
  } else if (state.m.size() != values.size()) {
    throw ShapeError("Adam: moment size " + std::to_string(state.m.size()) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads.empty() ? 0.0 : grads[i];
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * g;
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    values[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
  }
}

Adam::Adam(ParameterSet& params, AdamOptions options)
    : params_(params), options_(options), moments_(params.size()) {
  if (!(options_.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
}

void Adam::Step() {
  auto& items = params_.items();
  if (items.size() != moments_.size()) {
    throw ShapeError("Adam: parameter set changed size after construction");
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].trainable) continue;
    AdamStep(items[i].tensor.values(), items[i].tensor.grad(), moments_[i], options_);
  }
  ++steps_;
}

}  // namespace cellformer
