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
#include "cellformer/data/cell_value.hpp"

#include <algorithm>
#include <cctype>

#include "cellformer/format.hpp"

namespace cellformer {

std::string_view ModalityName(Modality m) {
  switch (m) {
    case Modality::kContinuous:
      return "continuous";
    case Modality::kCategorical:
      return "categorical";
    case Modality::kBinary:
      return "binary";
    case Modality::kFreeText:
      return "free_text";
  }
  return "unknown";
}

Modality ParseModality(std::string_view name) {
  if (name == "continuous") return Modality::kContinuous;
  if (name == "categorical") return Modality::kCategorical;
  if (name == "binary") return Modality::kBinary;
  if (name == "free_text") return Modality::kFreeText;
  throw InvalidArgument("unknown modality '" + std::string(name) + "'");
}

std::optional<Modality> CellValue::modality() const {
  switch (value_.index()) {
    case 1:
      return Modality::kContinuous;
    case 2:
      return Modality::kCategorical;
    case 3:
      return Modality::kBinary;
    case 4:
      return Modality::kFreeText;
    default:
      return std::nullopt;
  }
}

std::string CellValue::CanonicalText() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Continuous>) {
          return FormatNumber(v.value);
        } else if constexpr (std::is_same_v<T, Categorical>) {
          return v.label;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return v.flag ? "yes" : "no";
        } else if constexpr (std::is_same_v<T, FreeText>) {
          return v.body;
        } else {
          return {};
        }
      },
      value_);
}

std::optional<bool> ParseBoolean(std::string_view text) {
  std::string lower(Trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "yes" || lower == "true" || lower == "1") return true;
  if (lower == "no" || lower == "false" || lower == "0") return false;
  return std::nullopt;
}

}  // namespace cellformer
