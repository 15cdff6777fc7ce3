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
#ifndef CELLFORMER_DATA_DATASET_HPP_
#define CELLFORMER_DATA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cellformer/data/cell_value.hpp"
#include "cellformer/data/schema.hpp"

namespace cellformer {

struct Row {
  std::size_t id = 0;  // position in the originally loaded or generated table
  std::vector<CellValue> cells;
  double duration = 0.0;

  bool operator==(const Row&) const = default;
};

struct Dataset {
  TableSchema schema;
  std::vector<Row> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  // Ordinal rank of row i under the schema's label edges.
  int Rank(std::size_t i) const;
  std::vector<int> Ranks() const;

  // Every row has one cell per feature and a non-negative duration.
  void Validate() const;
};

// ---- I/O ----

// Reads a UTF-8 CSV whose header names every schema feature plus the label
// column, in any order. Empty fields become Missing. Errors carry the 1-based
// data row and the column name.
Dataset LoadDataset(const std::filesystem::path& csv_path,
                    const std::filesystem::path& schema_path);
Dataset ReadDatasetCsv(std::istream& in, const TableSchema& schema);

// Header is the schema feature order followed by the label column.
void WriteDatasetCsv(const Dataset& data, std::ostream& out);
void SaveDatasetCsv(const Dataset& data, const std::filesystem::path& path);

// ---- Imputation ----

// Per-column fill values, computed from one dataset (the training split) and
// applied to any split. Free-text columns have no fill value.
class ImputationStats {
 public:
  // Throws DataError naming the column when an imputed column has no
  // present value.
  static ImputationStats Fit(const Dataset& source);

  Dataset Apply(const Dataset& target) const;
  const CellValue& fill(std::size_t column) const { return fills_.at(column); }

 private:
  std::vector<CellValue> fills_;  // Missing for columns without imputation
};

// Imputes `data` with statistics drawn from itself.
Dataset Impute(const Dataset& data);

// ---- Labels ----

// Number of edges <= duration, i.e. left-closed/right-open bins. Throws
// InvalidArgument for a negative duration.
int BinLabel(double duration, std::span<const double> edges);

// ---- Splits ----

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded shuffle, then 3:1:1. val and test get floor(N/5) rows each and train
// keeps the remainder. Requires N >= 5.
Splits Split(const Dataset& data, std::uint64_t seed);

// ---- Corruption ----

struct CorruptionResult {
  Dataset data;
  // Row-major N x m; 1 where the cell was replaced.
  std::vector<std::uint8_t> flags;

  std::size_t num_corrupted() const;
  bool corrupted(std::size_t row, std::size_t column) const {
    return flags[row * data.schema.num_features() + column] != 0;
  }
};

// Independently for every (row, feature), with probability `rate` replaces the
// cell by a uniform draw from the column's present values in `data`. Missing
// cells are eligible. Labels are never touched.
CorruptionResult Corrupt(const Dataset& data, double rate, std::uint64_t seed);

// "row,column,was_corrupted" with row = Row::id and column = feature name.
void WriteCorruptionFlags(const CorruptionResult& result, std::ostream& out);

// ---- Synthetic data ----

enum class SynthVariant {
  // Rank is planted only in a severity phrase inside a free-text note;
  // numeric, categorical and binary columns are independent of it.
  kTextSignal,
  // Rank is a function of the categorical and binary columns.
  kTabularSignal,
};

struct SynthOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  SynthVariant variant = SynthVariant::kTextSignal;
  // Fraction of cells in the auxiliary free-text column left Missing.
  double missing_text_fraction = 0.3;
  // Fraction of continuous/categorical/binary cells left Missing.
  double missing_tabular_fraction = 0.05;
};

// Five balanced ranks under kSurgeryEdgesHours. Requires n >= 10.
Dataset Synthesize(const SynthOptions& options);

// The severity phrases of rank k in the text-signal variant.
std::span<const char* const> SeverityPhrases(int rank);

}  // namespace cellformer

#endif  // CELLFORMER_DATA_DATASET_HPP_
