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
#include "cellformer/train/reports.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cellformer/embed/embedding.hpp"
#include "cellformer/error.hpp"
#include "cellformer/format.hpp"

namespace cellformer {
namespace {

nlohmann::ordered_json MetricsObject(const RankMetrics& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}};
}

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string MetricsJson(const TrainConfig& config, const RunResult& run) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config.ToJson(false));
  auto seeds = nlohmann::ordered_json::array();
  for (const auto& s : run.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"best_epoch", s.best_epoch},
                     {"epochs_run", s.history.size()},
                     {"train", MetricsObject(s.train)},
                     {"val", MetricsObject(s.val)},
                     {"test", MetricsObject(s.test)}});
  }
  j["seeds"] = std::move(seeds);
  j["mean"] = {{"test", MetricsObject(run.mean)}};
  return j.dump(2) + "\n";
}

void WriteHistoryCsv(const RunResult& run, std::ostream& out) {
  out << "seed,epoch,train_loss,val_rmse,val_mae\n";
  for (const auto& s : run.seeds) {
    for (const auto& e : s.history) {
      out << s.seed << ',' << e.epoch << ',' << FormatNumber(e.train_loss) << ','
          << FormatNumber(e.val.rmse) << ',' << FormatNumber(e.val.mae) << '\n';
    }
  }
}

void WritePredictionsCsv(std::uint64_t seed, const Evaluation& evaluation, std::ostream& out,
                         bool header) {
  const std::size_t width = evaluation.probabilities.empty() ? 0 : evaluation.probabilities[0].size();
  if (header) {
    out << "seed,id,true_rank,pred_rank";
    for (std::size_t k = 0; k < width; ++k) out << ",p_" << k;
    out << '\n';
  }
  for (std::size_t i = 0; i < evaluation.predicted.size(); ++i) {
    out << seed << ',' << evaluation.ids[i] << ',' << evaluation.truth[i] << ','
        << evaluation.predicted[i];
    for (double p : evaluation.probabilities[i]) out << ',' << FormatNumber(p);
    out << '\n';
  }
}

void WritePredictionsCsv(const RunResult& run, std::ostream& out) {
  bool header = true;
  for (const auto& s : run.seeds) {
    WritePredictionsCsv(s.seed, s.test_eval, out, header);
    header = false;
  }
}

void WriteCurveCsv(std::span<const CurvePoint> curve, std::ostream& out) {
  out << "rate,rmse,mae\n";
  for (const auto& p : curve) {
    out << FormatNumber(p.rate) << ',' << FormatNumber(p.metrics.rmse) << ','
        << FormatNumber(p.metrics.mae) << '\n';
  }
}

void WriteSeedCurvesCsv(std::span<const std::pair<std::uint64_t, std::vector<CurvePoint>>> curves,
                        std::ostream& out) {
  out << "seed,rate,rmse,mae,corrupted_cells\n";
  for (const auto& [seed, curve] : curves) {
    for (const auto& p : curve) {
      out << seed << ',' << FormatNumber(p.rate) << ',' << FormatNumber(p.metrics.rmse) << ','
          << FormatNumber(p.metrics.mae) << ',' << p.corrupted_cells << '\n';
    }
  }
}

std::string FileDigest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ContentKey(bytes);
}

std::string ManifestJson(const TrainConfig& config, std::string_view command,
                         std::span<const std::filesystem::path> inputs) {
  nlohmann::ordered_json j;
  j["tool"] = kToolVersion;
  j["command"] = command;
  j["config"] = nlohmann::ordered_json::parse(config.ToJson(true));
  j["seeds"] = config.seeds;
  auto digests = nlohmann::ordered_json::object();
  for (const auto& p : inputs) {
    if (!p.empty() && std::filesystem::is_regular_file(p)) digests[p.string()] = FileDigest(p);
  }
  j["inputs"] = std::move(digests);
  j["started_at"] = UtcTimestamp();
  return j.dump(2) + "\n";
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cellformer
