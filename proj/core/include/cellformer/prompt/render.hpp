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
#ifndef CELLFORMER_PROMPT_RENDER_HPP_
#define CELLFORMER_PROMPT_RENDER_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/data/dataset.hpp"
#include "cellformer/data/schema.hpp"

namespace cellformer {

struct RenderedCell {
  std::string sentence;
  bool present = false;
};

// The m prompt sentences of one record. presence[j] is false only for a
// Missing free-text cell, whose sentence is empty.
struct PromptedSample {
  std::vector<std::string> prompts;
  std::vector<bool> presence;
};

// Substitutes the cell's canonical text into the feature template. Missing
// free text renders as ("", false); any other Missing cell, or a cell of the
// wrong modality, throws DataError.
RenderedCell Render(const FeatureSpec& spec, const CellValue& cell);

// Elementwise Render in schema order. `row_number`, when non-zero, is used in
// error messages.
PromptedSample RenderSample(const TableSchema& schema, std::span<const CellValue> row,
                            std::size_t row_number = 0);

std::vector<PromptedSample> RenderDataset(const Dataset& data);

// One line per present prompt: "<row id>\t<column index>\t<sentence>".
// Backslash, tab, CR and LF inside sentences are written as \\, \t, \r, \n.
void WritePromptDump(const Dataset& data, std::ostream& out);

std::string EscapePromptField(std::string_view text);
std::string UnescapePromptField(std::string_view text);

struct PromptRecord {
  std::size_t row = 0;
  std::size_t column = 0;
  std::string sentence;
};
std::vector<PromptRecord> ReadPromptDump(std::istream& in);

}  // namespace cellformer

#endif  // CELLFORMER_PROMPT_RENDER_HPP_
