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
#ifndef CELLFORMER_MODEL_METRICS_HPP_
#define CELLFORMER_MODEL_METRICS_HPP_

#include <span>

namespace cellformer {

// Root mean squared rank difference. Throws InvalidArgument on empty input or
// a length mismatch.
double Rmse(std::span<const int> predicted, std::span<const int> truth);
// Mean absolute rank difference, same preconditions as Rmse.
double Mae(std::span<const int> predicted, std::span<const int> truth);

struct RankMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  bool operator==(const RankMetrics&) const = default;
};

RankMetrics ComputeMetrics(std::span<const int> predicted, std::span<const int> truth);

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_METRICS_HPP_
