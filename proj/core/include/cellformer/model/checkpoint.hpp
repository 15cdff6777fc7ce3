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
#ifndef CELLFORMER_MODEL_CHECKPOINT_HPP_
#define CELLFORMER_MODEL_CHECKPOINT_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "cellformer/model/rank_model.hpp"

namespace cellformer {

// Checkpoint container "CFCK1":
//   bytes 0..5   magic "CFCK1\n"
//   bytes 6..13  header length H, unsigned 64-bit little-endian
//   next H bytes UTF-8 JSON header:
//                {"format": "CFCK1", "spec": <ModelSpec>, "metadata": <object>,
//                 "parameters": [{"name", "shape", "trainable", "count"}, ...]}
//   remainder    parameter values in manifest order as little-endian IEEE-754
//                32-bit floats
// Values are rounded to float when saved; a model whose parameters were
// already passed through ParameterSet::RoundToFloat round-trips exactly.
void SaveCheckpoint(const RankModel& model, const std::filesystem::path& path,
                    std::string_view metadata_json = "{}");

struct LoadedCheckpoint {
  std::unique_ptr<RankModel> model;
  std::string metadata_json;
};

// Throws FormatError on a bad magic, truncated data, or a manifest that does
// not match the parameters the stored spec builds. When `expected` is given,
// a stored spec that differs from it is also rejected.
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path,
                                const ModelSpec* expected = nullptr);

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_CHECKPOINT_HPP_
