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
#ifndef CELLFORMER_MODEL_GRAD_SUITE_HPP_
#define CELLFORMER_MODEL_GRAD_SUITE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cellformer/autodiff/grad_check.hpp"

namespace cellformer {

struct GradSuiteEntry {
  std::string name;
  ad::GradCheckReport report;
};

// Central finite-difference checks, in 64-bit, of every differentiable
// operation, the three head losses, and the full model loss (cell
// transformer with each head, plus the MLP) at toy sizes. Each operation is
// reduced to a scalar through a fixed random projection so that no gradient
// is trivially constant. ReLU inputs are kept away from the kink.
std::vector<GradSuiteEntry> RunGradientSuite(std::uint64_t seed = 0);

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_GRAD_SUITE_HPP_
