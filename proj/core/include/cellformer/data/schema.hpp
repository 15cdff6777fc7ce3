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
#ifndef CELLFORMER_DATA_SCHEMA_HPP_
#define CELLFORMER_DATA_SCHEMA_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/data/cell_value.hpp"
#include "cellformer/prompt/template.hpp"

namespace cellformer {

enum class Imputation { kMean, kMode, kNone };

std::string_view ImputationName(Imputation i);
Imputation ParseImputation(std::string_view name);
// mean for continuous, mode for categorical/binary, none for free text.
Imputation DefaultImputation(Modality m);

struct FeatureSpec {
  std::string name;
  Modality modality = Modality::kContinuous;
  Template prompt;
  Imputation imputation = Imputation::kMean;

  // Throws InvalidArgument when the imputation policy does not fit the modality.
  void Validate() const;
};

// Surgical duration in hours: 0-1h, 1-2h, 2-3h, 3-4h, >4h.
inline const std::vector<double> kSurgeryEdgesHours = {1.0, 2.0, 3.0, 4.0};
// ICU length of stay in days: 0-1, 1-3, 3-7, 7-14, >14.
inline const std::vector<double> kIcuStayEdgesDays = {1.0, 3.0, 7.0, 14.0};

struct LabelSpec {
  std::string column = "duration";
  std::vector<double> edges;  // strictly increasing
  std::string units;

  std::size_t num_ranks() const { return edges.size() + 1; }
};

// Ordered feature list plus the label binning. The descriptor file is JSON:
//
//   {"features": [{"name": "weight", "modality": "continuous",
//                  "template": "The weight of patient is {value} kilograms",
//                  "imputation": "mean"}, ...],
//    "label": {"column": "duration", "edges": [1, 2, 3, 4], "units": "hours"}}
//
// "template" and "imputation" are optional per feature. "label.preset" may be
// "surgery_hours" or "icu_days" instead of explicit edges.
class TableSchema {
 public:
  TableSchema() = default;
  TableSchema(std::vector<FeatureSpec> features, LabelSpec label);

  static TableSchema FromJson(std::string_view json);
  static TableSchema Load(const std::filesystem::path& path);
  std::string ToJson() const;
  void Save(const std::filesystem::path& path) const;

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t j) const { return features_.at(j); }
  const LabelSpec& label() const { return label_; }
  std::size_t num_features() const { return features_.size(); }
  std::size_t num_ranks() const { return label_.num_ranks(); }
  std::optional<std::size_t> IndexOf(std::string_view name) const;

  // Same features in another order.
  TableSchema Permuted(const std::vector<std::size_t>& order) const;

 private:
  void Validate() const;

  std::vector<FeatureSpec> features_;
  LabelSpec label_;
};

}  // namespace cellformer

#endif  // CELLFORMER_DATA_SCHEMA_HPP_
