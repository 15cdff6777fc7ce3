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
#ifndef CELLFORMER_TRAIN_FEATURIZE_HPP_
#define CELLFORMER_TRAIN_FEATURIZE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "cellformer/data/dataset.hpp"
#include "cellformer/embed/embedding.hpp"

namespace cellformer {

// Numeric view of a record for the MLP baseline: continuous columns are
// standardised with training-split mean and population standard deviation,
// binary columns map to {0, 1}, categorical columns are one-hot over the
// labels seen in the training split, and free-text columns are dropped.
class NumericFeaturizer {
 public:
  struct Column {
    std::size_t index = 0;  // schema column
    Modality modality = Modality::kContinuous;
    double mean = 0.0;
    double scale = 1.0;
    std::vector<std::string> categories;  // sorted
    std::size_t width() const;
  };

  // `train` must be imputed; Missing cells in non-free-text columns throw.
  static NumericFeaturizer Fit(const Dataset& train);

  std::size_t width() const { return width_; }
  const std::vector<Column>& columns() const { return columns_; }

  std::vector<double> Transform(const Row& row) const;
  // A single-row EmbeddedSample with mask {true}.
  EmbeddedSample TransformSample(const Row& row) const;

 private:
  std::vector<Column> columns_;
  std::size_t width_ = 0;
};

}  // namespace cellformer

#endif  // CELLFORMER_TRAIN_FEATURIZE_HPP_
