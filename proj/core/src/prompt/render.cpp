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
#include "cellformer/prompt/render.hpp"

#include <istream>
#include <ostream>

#include "cellformer/error.hpp"

namespace cellformer {

std::string EscapePromptField(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string UnescapePromptField(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out += text[i];
      continue;
    }
    switch (text[++i]) {
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      case 'r':
        out += '\r';
        break;
      case '\\':
        out += '\\';
        break;
      default:
        throw FormatError("prompt dump: unknown escape \\" + std::string(1, text[i]));
    }
  }
  return out;
}

RenderedCell Render(const FeatureSpec& spec, const CellValue& cell) {
  if (cell.is_missing()) {
    if (spec.modality == Modality::kFreeText) return {"", false};
    throw DataError("missing " + std::string(ModalityName(spec.modality)) +
                        " cell reached rendering; impute before rendering",
                    std::nullopt, spec.name);
  }
  if (*cell.modality() != spec.modality) {
    throw DataError("cell is " + std::string(ModalityName(*cell.modality())) + " but feature is " +
                        std::string(ModalityName(spec.modality)),
                    std::nullopt, spec.name);
  }
  return {spec.prompt.Render(cell.CanonicalText()), true};
}

PromptedSample RenderSample(const TableSchema& schema, std::span<const CellValue> row,
                            std::size_t row_number) {
  if (row.size() != schema.num_features()) {
    throw DataError("row has " + std::to_string(row.size()) + " cells, schema has " +
                        std::to_string(schema.num_features()),
                    row_number ? std::optional<std::size_t>(row_number) : std::nullopt);
  }
  PromptedSample sample;
  sample.prompts.reserve(row.size());
  sample.presence.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    try {
      auto rendered = Render(schema.feature(j), row[j]);
      sample.prompts.push_back(std::move(rendered.sentence));
      sample.presence.push_back(rendered.present);
    } catch (const DataError& e) {
      if (!row_number) throw;
      throw DataError(e.what(), row_number);
    }
  }
  return sample;
}

std::vector<PromptedSample> RenderDataset(const Dataset& data) {
  std::vector<PromptedSample> out;
  out.reserve(data.size());
  for (const auto& row : data.rows) out.push_back(RenderSample(data.schema, row.cells, row.id + 1));
  return out;
}

void WritePromptDump(const Dataset& data, std::ostream& out) {
  for (const auto& row : data.rows) {
    const auto sample = RenderSample(data.schema, row.cells, row.id + 1);
    for (std::size_t j = 0; j < sample.prompts.size(); ++j) {
      if (!sample.presence[j]) continue;
      out << row.id << '\t' << j << '\t' << EscapePromptField(sample.prompts[j]) << '\n';
    }
  }
}

std::vector<PromptRecord> ReadPromptDump(std::istream& in) {
  std::vector<PromptRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError("prompt dump line " + std::to_string(line_number) +
                        ": expected row<TAB>column<TAB>sentence");
    }
    try {
      records.push_back({std::stoul(line.substr(0, t1)), std::stoul(line.substr(t1 + 1, t2 - t1 - 1)),
                         UnescapePromptField(line.substr(t2 + 1))});
    } catch (const std::logic_error&) {
      throw FormatError("prompt dump line " + std::to_string(line_number) + ": bad row/column index");
    }
  }
  return records;
}

}  // namespace cellformer
