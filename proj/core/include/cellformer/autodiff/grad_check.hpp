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
#ifndef CELLFORMER_AUTODIFF_GRAD_CHECK_HPP_
#define CELLFORMER_AUTODIFF_GRAD_CHECK_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "cellformer/autodiff/tensor.hpp"

namespace cellformer::ad {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;  // coordinates compared
  std::string worst;        // "input#index" of the largest error
};

struct GradCheckOptions {
  double eps = 1e-5;
  // Relative errors use max(|analytic|, |numeric|, abs_floor) as denominator,
  // so gradients that are zero up to round-off do not blow up.
  double abs_floor = 1e-6;
};

// Compares analytic gradients of a scalar-valued `loss` with respect to every
// element of `inputs` against central finite differences. `loss` is called
// repeatedly and must rebuild its graph from the current input values. Input
// gradients are cleared before and after the check.
GradCheckReport GradCheck(const std::function<Tensor()>& loss, std::span<Tensor> inputs,
                          const GradCheckOptions& options = {});

// Single-input convenience form.
double GradCheck(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps = 1e-5);

}  // namespace cellformer::ad

#endif  // CELLFORMER_AUTODIFF_GRAD_CHECK_HPP_
