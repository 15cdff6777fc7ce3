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
#include "cellformer/train/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cellformer/error.hpp"

namespace cellformer {

std::size_t NumericFeaturizer::Column::width() const {
  return modality == Modality::kCategorical ? categories.size() : 1;
}

NumericFeaturizer NumericFeaturizer::Fit(const Dataset& train) {
  if (train.empty()) throw InvalidArgument("featurizer needs a non-empty training split");
  NumericFeaturizer f;
  const auto& schema = train.schema;
  for (std::size_t j = 0; j < schema.num_features(); ++j) {
    const auto& spec = schema.feature(j);
    if (spec.modality == Modality::kFreeText) continue;
    Column col;
    col.index = j;
    col.modality = spec.modality;
    for (std::size_t r = 0; r < train.size(); ++r) {
      if (train.rows[r].cells[j].is_missing()) {
        throw DataError("featurizer input must be imputed", r + 1, spec.name);
      }
    }
    if (spec.modality == Modality::kContinuous) {
      double sum = 0.0;
      for (const auto& row : train.rows) sum += row.cells[j].continuous();
      col.mean = sum / static_cast<double>(train.size());
      double sq = 0.0;
      for (const auto& row : train.rows) {
        const double d = row.cells[j].continuous() - col.mean;
        sq += d * d;
      }
      const double sd = std::sqrt(sq / static_cast<double>(train.size()));
      col.scale = sd > 0.0 ? sd : 1.0;
    } else if (spec.modality == Modality::kCategorical) {
      std::set<std::string> labels;
      for (const auto& row : train.rows) labels.insert(row.cells[j].categorical());
      col.categories.assign(labels.begin(), labels.end());
    }
    f.width_ += col.width();
    f.columns_.push_back(std::move(col));
  }
  if (f.width_ == 0) throw InvalidArgument("schema has no numeric features for the MLP baseline");
  return f;
}

std::vector<double> NumericFeaturizer::Transform(const Row& row) const {
  std::vector<double> out;
  out.reserve(width_);
  for (const auto& col : columns_) {
    const auto& cell = row.cells.at(col.index);
    if (cell.is_missing()) throw DataError("featurizer input must be imputed", row.id + 1, "#" + std::to_string(col.index));
    switch (col.modality) {
      case Modality::kContinuous:
        out.push_back((cell.continuous() - col.mean) / col.scale);
        break;
      case Modality::kBinary:
        out.push_back(cell.binary() ? 1.0 : 0.0);
        break;
      case Modality::kCategorical: {
        const auto it = std::lower_bound(col.categories.begin(), col.categories.end(), cell.categorical());
        for (auto c = col.categories.begin(); c != col.categories.end(); ++c) {
          out.push_back(c == it && *it == cell.categorical() ? 1.0 : 0.0);
        }
        break;
      }
      case Modality::kFreeText:
        break;
    }
  }
  return out;
}

EmbeddedSample NumericFeaturizer::TransformSample(const Row& row) const {
  EmbeddedSample s;
  s.rows = 1;
  s.dim = width_;
  s.matrix = Transform(row);
  s.mask = {true};
  return s;
}

}  // namespace cellformer
