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
#include "cellformer/model/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "cellformer/error.hpp"

namespace cellformer {
namespace {

void CheckLengths(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty() || truth.empty()) throw InvalidArgument("metrics need at least one prediction");
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("metrics got " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
  }
}

}  // namespace

double Rmse(std::span<const int> predicted, std::span<const int> truth) {
  CheckLengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double diff = predicted[i] - truth[i];
    total += diff * diff;
  }
  return std::sqrt(total / static_cast<double>(predicted.size()));
}

double Mae(std::span<const int> predicted, std::span<const int> truth) {
  CheckLengths(predicted, truth);
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - truth[i]);
  return total / static_cast<double>(predicted.size());
}

RankMetrics ComputeMetrics(std::span<const int> predicted, std::span<const int> truth) {
  return {Rmse(predicted, truth), Mae(predicted, truth)};
}

}  // namespace cellformer
