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
#ifndef CELLFORMER_TRAIN_REPORTS_HPP_
#define CELLFORMER_TRAIN_REPORTS_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/train/experiment.hpp"

namespace cellformer {

inline constexpr std::string_view kToolVersion = "cellformer 0.1.0";

// {"config": <resolved config without out_dir>,
//  "seeds": [{"seed", "best_epoch", "epochs_run", "train": {"rmse", "mae"},
//             "val": {...}, "test": {...}}, ...],
//  "mean": {"test": {"rmse", "mae"}}}
// Contains no timestamps or paths of outputs, so identical runs produce
// identical bytes.
std::string MetricsJson(const TrainConfig& config, const RunResult& run);

// Columns: seed,epoch,train_loss,val_rmse,val_mae
void WriteHistoryCsv(const RunResult& run, std::ostream& out);

// Columns: seed,id,true_rank,pred_rank,p_0..p_{w-1}, where w is K for CE
// (class probabilities) and K-1 for OR and CORAL (task probabilities).
void WritePredictionsCsv(const RunResult& run, std::ostream& out);
void WritePredictionsCsv(std::uint64_t seed, const Evaluation& evaluation, std::ostream& out,
                         bool header = true);

// Columns: rate,rmse,mae
void WriteCurveCsv(std::span<const CurvePoint> curve, std::ostream& out);
// Columns: seed,rate,rmse,mae,corrupted_cells
void WriteSeedCurvesCsv(std::span<const std::pair<std::uint64_t, std::vector<CurvePoint>>> curves,
                        std::ostream& out);

// Lowercase hex SHA-256 of a file's bytes.
std::string FileDigest(const std::filesystem::path& path);

// {"tool", "command", "config", "seeds", "inputs": {path: sha256}, "started_at"}
// Inputs that do not exist on disk are skipped.
std::string ManifestJson(const TrainConfig& config, std::string_view command,
                         std::span<const std::filesystem::path> inputs);

// Writes `text` to `path` via a temporary file and rename.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace cellformer

#endif  // CELLFORMER_TRAIN_REPORTS_HPP_
