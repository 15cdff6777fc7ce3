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
#include "cellformer/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include "cellformer/data/csv.hpp"
#include "cellformer/error.hpp"
#include "cellformer/format.hpp"
#include "cellformer/random.hpp"

namespace cellformer {

int Dataset::Rank(std::size_t i) const {
  return BinLabel(rows.at(i).duration, schema.label().edges);
}

std::vector<int> Dataset::Ranks() const {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = Rank(i);
  return out;
}

void Dataset::Validate() const {
  const std::size_t m = schema.num_features();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.cells.size() != m) {
      throw DataError("expected " + std::to_string(m) + " cells, got " +
                          std::to_string(row.cells.size()),
                      i + 1);
    }
    if (!(row.duration >= 0.0) || !std::isfinite(row.duration)) {
      throw DataError("duration must be a finite non-negative number", i + 1,
                      schema.label().column);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto modality = row.cells[j].modality();
      if (modality && *modality != schema.feature(j).modality) {
        throw DataError("cell modality " + std::string(ModalityName(*modality)) +
                            " does not match feature modality " +
                            std::string(ModalityName(schema.feature(j).modality)),
                        i + 1, schema.feature(j).name);
      }
    }
  }
}

// ---- I/O ----

namespace {

CellValue ParseCell(const std::string& raw, const FeatureSpec& spec, std::size_t row) {
  if (raw.empty()) return CellValue::MakeMissing();
  switch (spec.modality) {
    case Modality::kContinuous: {
      const auto value = ParseNumber(raw);
      if (!value || !std::isfinite(*value)) {
        throw DataError("cannot parse '" + raw + "' as a finite number", row, spec.name);
      }
      return CellValue::MakeContinuous(*value);
    }
    case Modality::kBinary: {
      const auto flag = ParseBoolean(raw);
      if (!flag) {
        throw DataError("cannot parse '" + raw + "' as binary (yes/no/true/false/1/0)", row,
                        spec.name);
      }
      return CellValue::MakeBinary(*flag);
    }
    case Modality::kCategorical:
      return CellValue::MakeCategorical(raw);
    case Modality::kFreeText:
      return CellValue::MakeFreeText(raw);
  }
  return CellValue::MakeMissing();
}

}  // namespace

Dataset ReadDatasetCsv(std::istream& in, const TableSchema& schema) {
  csv::Reader reader(in);
  const auto header = reader.Next();
  if (!header) throw DataError("CSV is empty; expected a header row");

  const std::size_t m = schema.num_features();
  std::vector<std::size_t> column_of_feature(m, SIZE_MAX);
  std::size_t label_column = SIZE_MAX;
  for (std::size_t c = 0; c < header->size(); ++c) {
    const std::string name((*header)[c]);
    if (name == schema.label().column) {
      label_column = c;
    } else if (auto j = schema.IndexOf(name)) {
      if (column_of_feature[*j] != SIZE_MAX) throw DataError("duplicate column in header", 0, name);
      column_of_feature[*j] = c;
    } else {
      throw DataError("unknown column not declared in the schema", 0, name);
    }
  }
  if (label_column == SIZE_MAX) throw DataError("missing label column", 0, schema.label().column);
  for (std::size_t j = 0; j < m; ++j) {
    if (column_of_feature[j] == SIZE_MAX) {
      throw DataError("schema feature has no CSV column", 0, schema.feature(j).name);
    }
  }

  Dataset data;
  data.schema = schema;
  std::size_t row_number = 0;
  while (auto record = reader.Next()) {
    ++row_number;
    if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
    if (record->size() != header->size()) {
      throw DataError("expected " + std::to_string(header->size()) + " fields, got " +
                          std::to_string(record->size()),
                      row_number);
    }
    Row row;
    row.id = data.rows.size();
    row.cells.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      row.cells.push_back(ParseCell((*record)[column_of_feature[j]], schema.feature(j), row_number));
    }
    const auto& raw_label = (*record)[label_column];
    const auto duration = ParseNumber(raw_label);
    if (!duration || !std::isfinite(*duration) || *duration < 0.0) {
      throw DataError("label '" + raw_label + "' is not a non-negative number", row_number,
                      schema.label().column);
    }
    row.duration = *duration;
    data.rows.push_back(std::move(row));
  }
  return data;
}

Dataset LoadDataset(const std::filesystem::path& csv_path,
                    const std::filesystem::path& schema_path) {
  const auto schema = TableSchema::Load(schema_path);
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file " + csv_path.string());
  return ReadDatasetCsv(in, schema);
}

void WriteDatasetCsv(const Dataset& data, std::ostream& out) {
  std::vector<std::string> fields;
  for (const auto& f : data.schema.features()) fields.push_back(f.name);
  fields.push_back(data.schema.label().column);
  csv::WriteRecord(out, fields);
  for (const auto& row : data.rows) {
    fields.clear();
    for (const auto& cell : row.cells) fields.push_back(cell.CanonicalText());
    fields.push_back(FormatNumber(row.duration));
    csv::WriteRecord(out, fields);
  }
}

void SaveDatasetCsv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file " + path.string());
  WriteDatasetCsv(data, out);
}

// ---- Imputation ----

ImputationStats ImputationStats::Fit(const Dataset& source) {
  if (source.empty()) throw InvalidArgument("cannot fit imputation statistics on an empty dataset");
  const std::size_t m = source.schema.num_features();
  ImputationStats stats;
  stats.fills_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& spec = source.schema.feature(j);
    if (spec.imputation == Imputation::kNone) continue;
    std::size_t present = 0;
    double total = 0.0;
    // Ordered by canonical text so ties go to the smallest label.
    std::map<std::string, std::pair<std::size_t, CellValue>> counts;
    for (const auto& row : source.rows) {
      const auto& cell = row.cells[j];
      if (cell.is_missing()) continue;
      ++present;
      if (spec.imputation == Imputation::kMean) {
        total += cell.continuous();
      } else {
        auto& slot = counts[cell.CanonicalText()];
        if (slot.first++ == 0) slot.second = cell;
      }
    }
    if (present == 0) {
      throw DataError("column is entirely missing; cannot compute its " +
                          std::string(ImputationName(spec.imputation)),
                      std::nullopt, spec.name);
    }
    if (spec.imputation == Imputation::kMean) {
      stats.fills_[j] = CellValue::MakeContinuous(total / static_cast<double>(present));
    } else {
      const auto best = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        return a.second.first < b.second.first;
      });
      stats.fills_[j] = best->second.second;
    }
  }
  return stats;
}

Dataset ImputationStats::Apply(const Dataset& target) const {
  if (target.schema.num_features() != fills_.size()) {
    throw InvalidArgument("imputation statistics were fitted on a different schema");
  }
  Dataset out = target;
  for (auto& row : out.rows) {
    for (std::size_t j = 0; j < fills_.size(); ++j) {
      if (row.cells[j].is_missing() && !fills_[j].is_missing()) row.cells[j] = fills_[j];
    }
  }
  return out;
}

Dataset Impute(const Dataset& data) { return ImputationStats::Fit(data).Apply(data); }

// ---- Labels ----

int BinLabel(double duration, std::span<const double> edges) {
  if (!(duration >= 0.0)) {
    throw InvalidArgument("duration must be non-negative, got " + FormatNumber(duration));
  }
  int rank = 0;
  for (double edge : edges) {
    if (edge <= duration) ++rank;
  }
  return rank;
}

// ---- Splits ----

Splits Split(const Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 5) throw InvalidArgument("split needs at least 5 rows, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, 0x5011));
  rng.Shuffle(std::span<std::size_t>(order));

  const std::size_t n_val = n / 5;
  const std::size_t n_test = n / 5;
  const std::size_t n_train = n - n_val - n_test;
  Splits out{{data.schema, {}}, {data.schema, {}}, {data.schema, {}}};
  for (std::size_t k = 0; k < n; ++k) {
    auto& target = k < n_train ? out.train : (k < n_train + n_val ? out.val : out.test);
    target.rows.push_back(data.rows[order[k]]);
  }
  return out;
}

// ---- Corruption ----

std::size_t CorruptionResult::num_corrupted() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

CorruptionResult Corrupt(const Dataset& data, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InvalidArgument("corruption rate must lie in [0, 1], got " + FormatNumber(rate));
  }
  if (data.empty()) throw InvalidArgument("cannot corrupt an empty dataset");
  const std::size_t m = data.schema.num_features();
  std::vector<std::vector<const CellValue*>> marginals(m);
  for (const auto& row : data.rows)
    for (std::size_t j = 0; j < m; ++j)
      if (!row.cells[j].is_missing()) marginals[j].push_back(&row.cells[j]);

  CorruptionResult result{data, std::vector<std::uint8_t>(data.size() * m, 0)};
  Rng rng(DeriveSeed(seed, 0xC0AA));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!rng.Bernoulli(rate)) continue;
      const auto& pool = marginals[j];
      if (pool.empty()) continue;
      result.data.rows[i].cells[j] = *pool[rng.UniformInt(pool.size())];
      result.flags[i * m + j] = 1;
    }
  }
  return result;
}

void WriteCorruptionFlags(const CorruptionResult& result, std::ostream& out) {
  const auto& schema = result.data.schema;
  csv::WriteRecord(out, {"row", "column", "was_corrupted"});
  for (std::size_t i = 0; i < result.data.size(); ++i) {
    for (std::size_t j = 0; j < schema.num_features(); ++j) {
      csv::WriteRecord(out, {std::to_string(result.data.rows[i].id), schema.feature(j).name,
                             result.corrupted(i, j) ? "1" : "0"});
    }
  }
}

// ---- Synthetic data ----

namespace {

constexpr const char* kSeverity[5][3] = {
    {"minor skin lesion excision", "simple sebaceous cyst removal", "brief superficial biopsy"},
    {"routine appendectomy", "uncomplicated inguinal hernia repair", "standard carpal tunnel release"},
    {"elective hip replacement", "gallbladder removal with adhesions", "thyroid lobectomy"},
    {"complex spinal fusion", "major bowel resection", "revision knee arthroplasty"},
    {"extensive multivisceral resection", "cardiac bypass with valve replacement",
     "prolonged free flap reconstruction"},
};

constexpr const char* kTheatre[] = {"booked for the main theatre", "booked for the east theatre",
                                    "booked for theatre three", "booked for the west wing theatre"};

constexpr const char* kHistory[] = {
    "hypertension controlled on medication", "previous abdominal surgery",
    "no known drug allergies",               "asthma since childhood",
    "former smoker",                         "chronic kidney disease stage two",
    "atrial fibrillation on anticoagulation", "obstructive sleep apnoea",
    "hypothyroidism",                        "penicillin allergy"};

constexpr const char* kAsa[] = {"I", "II", "III", "IV"};

// Rounds to `decimals` places; dividing by an exact power of ten keeps the
// shortest decimal form short (39.3 rather than 39.300000000000004).
double Round(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

template <std::size_t N>
const char* Pick(Rng& rng, const char* const (&items)[N]) {
  return items[rng.UniformInt(N)];
}

TableSchema SyntheticSchema() {
  auto feature = [](std::string name, Modality modality, std::string tmpl) {
    return FeatureSpec{std::move(name), modality, Template::Parse(tmpl), DefaultImputation(modality)};
  };
  std::vector<FeatureSpec> features = {
      feature("age", Modality::kContinuous, "The age of the patient is {value} years."),
      feature("weight", Modality::kContinuous, "The weight of patient is {value} kilograms"),
      feature("asa_class", Modality::kCategorical, "The ASA physical status of the patient is {value}."),
      feature("diabetes", Modality::kBinary, "The patient has diabetes: {value}"),
      feature("procedure_note", Modality::kFreeText, "The surgical booking note reads: {value}."),
      feature("history_note", Modality::kFreeText, "The medical history notes: {value}."),
  };
  return TableSchema(std::move(features), LabelSpec{"duration", kSurgeryEdgesHours, "hours"});
}

}  // namespace

std::span<const char* const> SeverityPhrases(int rank) {
  if (rank < 0 || rank > 4) throw InvalidArgument("severity rank must be in [0, 4]");
  return kSeverity[rank];
}

Dataset Synthesize(const SynthOptions& options) {
  if (options.n < 10) throw InvalidArgument("synthesize needs n >= 10");
  Dataset data;
  data.schema = SyntheticSchema();
  Rng rng(DeriveSeed(options.seed, 0x5E7));
  const bool text_signal = options.variant == SynthVariant::kTextSignal;
  data.rows.reserve(options.n);
  for (std::size_t i = 0; i < options.n; ++i) {
    const double age = Round(rng.Uniform(18.0, 90.0), 1);
    const double weight = Round(std::clamp(rng.Normal(72.0, 13.0), 35.0, 160.0), 1);
    const std::size_t asa = rng.UniformInt(4);
    const bool diabetes = rng.Bernoulli(0.3);
    const std::size_t phrase_class = rng.UniformInt(5);
    const char* phrase = kSeverity[phrase_class][rng.UniformInt(3)];
    const char* theatre = Pick(rng, kTheatre);
    std::string history = Pick(rng, kHistory);
    if (rng.Bernoulli(0.5)) history += std::string("; ") + Pick(rng, kHistory);

    const int rank = text_signal ? static_cast<int>(phrase_class)
                                 : static_cast<int>(asa) + (diabetes ? 1 : 0);
    const double duration = Round(rank + rng.Uniform(0.05, 0.95), 2);

    auto maybe_missing = [&](CellValue v, double p) {
      return rng.Bernoulli(p) ? CellValue::MakeMissing() : std::move(v);
    };
    // In the tabular variant the rank-bearing cells stay present.
    const double tabular_missing = options.missing_tabular_fraction;
    const double signal_missing = text_signal ? tabular_missing : 0.0;
    Row row;
    row.id = i;
    row.duration = duration;
    row.cells.push_back(maybe_missing(CellValue::MakeContinuous(age), tabular_missing));
    row.cells.push_back(maybe_missing(CellValue::MakeContinuous(weight), tabular_missing));
    row.cells.push_back(maybe_missing(CellValue::MakeCategorical(kAsa[asa]), signal_missing));
    row.cells.push_back(maybe_missing(CellValue::MakeBinary(diabetes), signal_missing));
    row.cells.push_back(CellValue::MakeFreeText(std::string(phrase) + ", " + theatre));
    row.cells.push_back(maybe_missing(CellValue::MakeFreeText(history), options.missing_text_fraction));
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace cellformer
