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
#ifndef CELLFORMER_DATA_CELL_VALUE_HPP_
#define CELLFORMER_DATA_CELL_VALUE_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cellformer/error.hpp"

namespace cellformer {

enum class Modality { kContinuous, kCategorical, kBinary, kFreeText };

std::string_view ModalityName(Modality m);
// Accepts "continuous", "categorical", "binary", "free_text".
Modality ParseModality(std::string_view name);

// One table cell. Present values carry their modality; Missing carries none.
class CellValue {
 public:
  struct Missing {
    bool operator==(const Missing&) const = default;
  };
  struct Continuous {
    double value;
    bool operator==(const Continuous&) const = default;
  };
  struct Categorical {
    std::string label;
    bool operator==(const Categorical&) const = default;
  };
  struct Binary {
    bool flag;
    bool operator==(const Binary&) const = default;
  };
  struct FreeText {
    std::string body;
    bool operator==(const FreeText&) const = default;
  };

  CellValue() = default;

  static CellValue MakeMissing() { return CellValue(); }
  static CellValue MakeContinuous(double value) {
    if (!std::isfinite(value)) throw InvalidArgument("continuous cell value must be finite");
    return CellValue(Continuous{value});
  }
  static CellValue MakeCategorical(std::string label) {
    if (label.empty()) throw InvalidArgument("categorical cell label must be non-empty");
    return CellValue(Categorical{std::move(label)});
  }
  static CellValue MakeBinary(bool flag) { return CellValue(Binary{flag}); }
  static CellValue MakeFreeText(std::string body) {
    if (body.empty()) throw InvalidArgument("free-text cell body must be non-empty");
    return CellValue(FreeText{std::move(body)});
  }

  bool is_missing() const { return std::holds_alternative<Missing>(value_); }
  // nullopt for Missing.
  std::optional<Modality> modality() const;

  double continuous() const { return std::get<Continuous>(value_).value; }
  const std::string& categorical() const { return std::get<Categorical>(value_).label; }
  bool binary() const { return std::get<Binary>(value_).flag; }
  const std::string& free_text() const { return std::get<FreeText>(value_).body; }

  // Canonical text: shortest round-trip decimal, "yes"/"no", or the text verbatim.
  // Empty for Missing.
  std::string CanonicalText() const;

  bool operator==(const CellValue&) const = default;

 private:
  template <typename T>
  explicit CellValue(T v) : value_(std::move(v)) {}

  std::variant<Missing, Continuous, Categorical, Binary, FreeText> value_;
};

// Case-insensitive {yes,no,true,false,1,0}; nullopt otherwise.
std::optional<bool> ParseBoolean(std::string_view text);

}  // namespace cellformer

#endif  // CELLFORMER_DATA_CELL_VALUE_HPP_
