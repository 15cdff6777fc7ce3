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
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cellformer/data/dataset.hpp"
#include "cellformer/embed/embedding.hpp"
#include "cellformer/error.hpp"
#include "cellformer/format.hpp"
#include "cellformer/model/checkpoint.hpp"
#include "cellformer/model/grad_suite.hpp"
#include "cellformer/prompt/render.hpp"
#include "cellformer/train/config.hpp"
#include "cellformer/train/experiment.hpp"
#include "cellformer/train/reports.hpp"

namespace fs = std::filesystem;
using namespace cellformer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

// Raised when a check subcommand runs cleanly but its verdict is negative.
class CheckFailure : public Error {
 public:
  using Error::Error;
};

// Flags shared by every subcommand that resolves a TrainConfig.
struct RunFlags {
  std::string config;
  std::string schema;
  std::string data;
  std::string store;
  std::string head;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string rates;
  std::string out_dir;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  bool verbose = false;
};

void AddRunFlags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--schema", f.schema, "Schema descriptor (JSON)")->check(CLI::ExistingFile);
  app->add_option("--data", f.data, "Dataset CSV (default: synthetic data from the config)")
      ->check(CLI::ExistingFile);
  app->add_option("--store", f.store, "CEMB1 embedding store; selects the store embedder")
      ->check(CLI::ExistingFile);
  app->add_option("--head", f.head, "Ordinal head")->check(CLI::IsMember({"ce", "or", "coral"}));
  app->add_option("--model", f.model, "Backbone")->check(CLI::IsMember({"cellformer", "mlp"}));
  auto* seed = app->add_option("--seed", f.seed, "Single training seed");
  app->add_option("--seeds", f.seeds, "Seed list, e.g. 0,1,2 or 0-4")->excludes(seed);
  app->add_option("--rates", f.rates, "Corruption rates, e.g. 0,0.05,0.1");
  app->add_option("--out-dir", f.out_dir, "Output directory (default: $CELLFORMER_OUT_DIR)");
  app->add_option("--patience", f.patience, "Early-stopping patience in epochs");
  app->add_option("--max-epochs", f.max_epochs, "Maximum training epochs");
  app->add_option("--batch-size", f.batch_size, "Mini-batch size");
  app->add_option("--lr", f.lr, "Adam learning rate");
  app->add_flag("-v,--verbose", f.verbose, "Log every epoch to stderr");
}

fs::path DefaultOutDir() {
  if (const char* env = std::getenv("CELLFORMER_OUT_DIR"); env && *env) return env;
  return "cellformer_out";
}

TrainConfig ResolveConfig(const RunFlags& f) {
  TrainConfig c = f.config.empty() ? TrainConfig{} : TrainConfig::Load(f.config);
  if (!f.data.empty()) c.data = f.data;
  if (!f.schema.empty()) c.schema = f.schema;
  if (!f.store.empty()) {
    c.embedder.kind = EmbedderKind::kStore;
    c.embedder.store = f.store;
  }
  if (!f.head.empty()) c.head = ParseHead(f.head);
  if (!f.model.empty()) c.model = ParseArchitecture(f.model);
  if (f.seed) c.seeds = {*f.seed};
  if (!f.seeds.empty()) c.seeds = ParseSeedList(f.seeds);
  if (!f.rates.empty()) c.rates = ParseRateList(f.rates);
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (c.out_dir.empty()) c.out_dir = DefaultOutDir();
  if (f.patience) c.patience = *f.patience;
  if (f.max_epochs) c.max_epochs = *f.max_epochs;
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.lr) c.learning_rate = *f.lr;
  c.Validate();
  return c;
}

std::vector<fs::path> InputFiles(const TrainConfig& c, const RunFlags& f) {
  std::vector<fs::path> inputs;
  if (!f.config.empty()) inputs.emplace_back(f.config);
  inputs.push_back(c.data);
  inputs.push_back(c.schema);
  if (c.embedder.kind == EmbedderKind::kStore) inputs.push_back(c.embedder.store);
  return inputs;
}

TrainOptions MakeTrainOptions(bool verbose) {
  TrainOptions options;
  if (verbose) {
    options.on_epoch = [](std::uint64_t seed, const EpochRecord& e) {
      std::cerr << "seed " << seed << " epoch " << e.epoch << " train_loss " << FormatNumber(e.train_loss)
                << " val_rmse " << FormatNumber(e.val.rmse) << " val_mae " << FormatNumber(e.val.mae) << '\n';
    };
  }
  return options;
}

std::string WriteString(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

fs::path CheckpointPath(const fs::path& out_dir, std::uint64_t seed) {
  return out_dir / "checkpoints" / ("seed_" + std::to_string(seed) + ".ckpt");
}

std::string CheckpointMetadata(const TrainConfig& c, const SeedResult& s) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(c.ToJson(false));
  j["seed"] = s.seed;
  j["best_epoch"] = s.best_epoch;
  j["test"] = {{"rmse", s.test.rmse}, {"mae", s.test.mae}};
  return j.dump();
}

// ---- synth ----

struct SynthFlags {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string variant = "text";
  double missing_text = 0.3;
  std::optional<double> corrupt_rate;
  std::uint64_t corrupt_seed = 0;
  std::string out_dir;
};

int RunSynth(const SynthFlags& f) {
  SynthOptions options;
  options.n = f.n;
  options.seed = f.seed;
  options.variant = f.variant == "tabular" ? SynthVariant::kTabularSignal : SynthVariant::kTextSignal;
  options.missing_text_fraction = f.missing_text;
  const auto data = Synthesize(options);
  const fs::path out = f.out_dir.empty() ? DefaultOutDir() : fs::path(f.out_dir);
  fs::create_directories(out);
  SaveDatasetCsv(data, out / "data.csv");
  data.schema.Save(out / "schema.json");
  std::cout << "wrote " << data.size() << " rows to " << (out / "data.csv").string() << '\n';
  if (f.corrupt_rate) {
    const auto corrupted = Corrupt(data, *f.corrupt_rate, f.corrupt_seed);
    SaveDatasetCsv(corrupted.data, out / "data_corrupted.csv");
    WriteTextFile(out / "corruption_flags.csv",
                  WriteString([&](std::ostream& o) { WriteCorruptionFlags(corrupted, o); }));
    std::cout << "corrupted " << corrupted.num_corrupted() << " cells into "
              << (out / "data_corrupted.csv").string() << '\n';
  }
  return kExitOk;
}

// ---- prompts ----

int RunPrompts(const RunFlags& flags, const std::string& out_path) {
  const auto config = ResolveConfig(flags);
  const auto splits = ImputedSplits(LoadConfiguredData(config), config.split_seed);
  const fs::path out = out_path.empty() ? config.out_dir / "prompts.tsv" : fs::path(out_path);
  WriteTextFile(out, WriteString([&](std::ostream& o) {
                  WritePromptDump(splits.train, o);
                  WritePromptDump(splits.val, o);
                  WritePromptDump(splits.test, o);
                }));
  std::cout << "wrote prompts to " << out.string() << '\n';
  return kExitOk;
}

// ---- embed-hash ----

int RunEmbedHash(const RunFlags& flags, const std::string& prompts_path, std::optional<std::size_t> dim,
                 std::optional<std::uint64_t> embed_seed, const std::string& out_path) {
  auto config = ResolveConfig(flags);
  if (dim) config.embedder.dim = *dim;
  if (embed_seed) config.embedder.seed = *embed_seed;
  if (config.embedder.dim == 0) throw InvalidArgument("--dim must be >= 1");
  std::vector<std::string> sentences;
  if (!prompts_path.empty()) {
    std::ifstream in(prompts_path);
    if (!in) throw FormatError("cannot open prompt dump " + prompts_path);
    for (auto& r : ReadPromptDump(in)) sentences.push_back(std::move(r.sentence));
  } else {
    const auto splits = ImputedSplits(LoadConfiguredData(config), config.split_seed);
    for (const auto* split : {&splits.train, &splits.val, &splits.test}) {
      for (const auto& sample : RenderDataset(*split)) {
        for (std::size_t j = 0; j < sample.prompts.size(); ++j)
          if (sample.presence[j]) sentences.push_back(sample.prompts[j]);
      }
    }
  }
  const HashEmbeddingProvider provider(config.embedder.dim, config.embedder.seed);
  std::set<std::string> unique(sentences.begin(), sentences.end());
  std::vector<std::pair<std::string, Embedding>> entries;
  for (const auto& s : unique) entries.emplace_back(s, provider.Embed(s));
  const fs::path out = out_path.empty() ? config.out_dir / "store.cemb" : fs::path(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  WriteStore(entries, out, true, provider.Describe());
  std::cout << "wrote " << entries.size() << " embeddings (dim " << config.embedder.dim << ") to "
            << out.string() << '\n';
  return kExitOk;
}

// ---- train ----

int RunTrain(const RunFlags& flags) {
  const auto config = ResolveConfig(flags);
  fs::create_directories(config.out_dir);
  WriteTextFile(config.out_dir / "manifest.json", ManifestJson(config, "train", InputFiles(config, flags)));
  const InputPipeline pipeline(config, LoadConfiguredData(config));
  const auto run = RunExperiment(config, pipeline, MakeTrainOptions(flags.verbose));
  for (const auto& s : run.seeds) {
    fs::create_directories(config.out_dir / "checkpoints");
    SaveCheckpoint(*s.model, CheckpointPath(config.out_dir, s.seed), CheckpointMetadata(config, s));
  }
  WriteTextFile(config.out_dir / "metrics.json", MetricsJson(config, run));
  WriteTextFile(config.out_dir / "history.csv", WriteString([&](std::ostream& o) { WriteHistoryCsv(run, o); }));
  WriteTextFile(config.out_dir / "predictions.csv",
                WriteString([&](std::ostream& o) { WritePredictionsCsv(run, o); }));
  for (const auto& s : run.seeds) {
    std::cout << "seed " << s.seed << " best_epoch " << s.best_epoch << " test_rmse " << FormatNumber(s.test.rmse)
              << " test_mae " << FormatNumber(s.test.mae) << '\n';
  }
  std::cout << "mean test_rmse " << FormatNumber(run.mean.rmse) << " test_mae " << FormatNumber(run.mean.mae)
            << '\n';
  return kExitOk;
}

// ---- eval ----

struct LoadedRun {
  std::uint64_t seed = 0;
  fs::path path;
  std::unique_ptr<RankModel> model;
  TrainConfig config;
};

std::vector<fs::path> CollectCheckpoints(const std::vector<std::string>& files, const std::string& run_dir) {
  std::vector<fs::path> paths(files.begin(), files.end());
  if (!run_dir.empty()) {
    const fs::path dir = fs::path(run_dir) / "checkpoints";
    if (!fs::is_directory(dir)) throw InvalidArgument("no checkpoints directory in " + run_dir);
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".ckpt") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw InvalidArgument("give --checkpoint or --run-dir");
  return paths;
}

LoadedRun LoadRun(const fs::path& path, const RunFlags& flags) {
  auto loaded = LoadCheckpoint(path);
  const auto meta = nlohmann::json::parse(loaded.metadata_json);
  if (!meta.contains("config") || !meta.contains("seed")) {
    throw FormatError("checkpoint " + path.string() + " carries no run configuration");
  }
  LoadedRun run;
  run.path = path;
  run.seed = meta["seed"].get<std::uint64_t>();
  run.config = TrainConfig::FromJson(meta["config"].dump());
  if (!flags.data.empty()) run.config.data = flags.data;
  if (!flags.schema.empty()) run.config.schema = flags.schema;
  if (!flags.store.empty()) {
    run.config.embedder.kind = EmbedderKind::kStore;
    run.config.embedder.store = flags.store;
  }
  run.model = std::move(loaded.model);
  return run;
}

// Pipelines keyed by the configuration that determines their inputs.
class PipelineCache {
 public:
  const InputPipeline& Get(const TrainConfig& config) {
    TrainConfig key_config = config;
    key_config.seeds = {0};
    const auto key = key_config.ToJson(false);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, std::make_unique<InputPipeline>(config, LoadConfiguredData(config))).first;
    }
    return *it->second;
  }

 private:
  std::map<std::string, std::unique_ptr<InputPipeline>> cache_;
};

int RunEval(const RunFlags& flags, const std::vector<std::string>& checkpoints, const std::string& run_dir,
            const std::string& out_path) {
  PipelineCache pipelines;
  nlohmann::ordered_json report;
  auto entries = nlohmann::ordered_json::array();
  std::vector<std::pair<std::uint64_t, RankMetrics>> per_seed;
  std::string predictions;
  bool header = true;
  for (const auto& path : CollectCheckpoints(checkpoints, run_dir)) {
    auto run = LoadRun(path, flags);
    const auto& pipeline = pipelines.Get(run.config);
    if (pipeline.input_dim() != run.model->spec().input_dim()) {
      throw DataError("checkpoint " + path.string() + " expects input width " +
                      std::to_string(run.model->spec().input_dim()) + ", data gives " +
                      std::to_string(pipeline.input_dim()));
    }
    const auto evaluation = Evaluate(*run.model, pipeline.test());
    entries.push_back({{"checkpoint", path.string()},
                       {"seed", run.seed},
                       {"test", {{"rmse", evaluation.metrics.rmse}, {"mae", evaluation.metrics.mae}}}});
    per_seed.emplace_back(run.seed, evaluation.metrics);
    predictions += WriteString([&](std::ostream& o) { WritePredictionsCsv(run.seed, evaluation, o, header); });
    header = false;
  }
  const auto mean = AverageBySeed(per_seed);
  report["checkpoints"] = std::move(entries);
  report["mean"] = {{"test", {{"rmse", mean.rmse}, {"mae", mean.mae}}}};
  const auto text = report.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) WriteTextFile(out_path, text);
  if (!flags.out_dir.empty()) WriteTextFile(fs::path(flags.out_dir) / "eval_predictions.csv", predictions);
  return kExitOk;
}

// ---- corrupt-bench ----

int RunCorruptBench(const RunFlags& flags, const std::vector<std::string>& checkpoints) {
  const auto config = ResolveConfig(flags);
  fs::create_directories(config.out_dir);
  std::vector<std::pair<std::uint64_t, std::vector<CurvePoint>>> curves;
  if (!checkpoints.empty()) {
    PipelineCache pipelines;
    for (const auto& path : checkpoints) {
      auto run = LoadRun(path, flags);
      curves.emplace_back(run.seed,
                          CorruptionBenchmark(*run.model, pipelines.Get(run.config), config.rates, run.seed));
    }
  } else {
    WriteTextFile(config.out_dir / "manifest.json",
                  ManifestJson(config, "corrupt-bench", InputFiles(config, flags)));
    const InputPipeline pipeline(config, LoadConfiguredData(config));
    const auto options = MakeTrainOptions(flags.verbose);
    for (auto seed : config.seeds) {
      const auto trained = TrainOneSeed(config, pipeline, seed, options);
      curves.emplace_back(seed, CorruptionBenchmark(*trained.model, pipeline, config.rates, seed));
    }
  }
  const auto mean = AverageCurves(curves);
  const auto text = WriteString([&](std::ostream& o) { WriteCurveCsv(mean, o); });
  WriteTextFile(config.out_dir / "curve.csv", text);
  WriteTextFile(config.out_dir / "curve_per_seed.csv",
                WriteString([&](std::ostream& o) { WriteSeedCurvesCsv(curves, o); }));
  std::cout << text;
  return kExitOk;
}

// ---- grad-check ----

int RunGradCheck(std::uint64_t seed, double tolerance) {
  double worst = 0.0;
  for (const auto& entry : RunGradientSuite(seed)) {
    std::cout << entry.name << " max_rel_err " << FormatNumber(entry.report.max_rel_err) << " checked "
              << entry.report.checked << '\n';
    worst = std::max(worst, entry.report.max_rel_err);
  }
  std::cout << "max_rel_err " << FormatNumber(worst) << '\n';
  if (!(worst < tolerance)) {
    throw CheckFailure("gradient check failed: max_rel_err " + FormatNumber(worst) + " >= " +
                       FormatNumber(tolerance));
  }
  return kExitOk;
}

int ReportError(int code, std::string_view kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-enhanced cell transformer for ordinal duration estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset and its schema");
  synth_cmd->add_option("--n", synth.n, "Number of rows")->check(CLI::Range(std::size_t{10}, std::size_t{100000000}));
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--variant", synth.variant, "Where the rank signal lives")
      ->check(CLI::IsMember({"text", "tabular"}));
  synth_cmd->add_option("--missing-text", synth.missing_text, "Fraction of missing history notes")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--corrupt-rate", synth.corrupt_rate, "Also write a corrupted copy at this rate")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--corrupt-seed", synth.corrupt_seed, "Seed of the corrupted copy");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory (default: $CELLFORMER_OUT_DIR)");

  RunFlags prompts_flags;
  std::string prompts_out;
  auto* prompts_cmd = app.add_subcommand("prompts", "Dump rendered prompts for the embedding exporter");
  AddRunFlags(prompts_cmd, prompts_flags);
  prompts_cmd->add_option("--out", prompts_out, "Output file (default: <out-dir>/prompts.tsv)");

  RunFlags embed_flags;
  std::string embed_prompts, embed_out;
  std::optional<std::size_t> embed_dim;
  std::optional<std::uint64_t> embed_seed;
  auto* embed_cmd = app.add_subcommand("embed-hash", "Build a CEMB1 store with the hash embedder");
  AddRunFlags(embed_cmd, embed_flags);
  embed_cmd->add_option("--prompts", embed_prompts, "Prompt dump to embed (default: render the dataset)")
      ->check(CLI::ExistingFile);
  embed_cmd->add_option("--dim", embed_dim, "Embedding width");
  embed_cmd->add_option("--embed-seed", embed_seed, "Hash embedder seed");
  embed_cmd->add_option("--out", embed_out, "Output store (default: <out-dir>/store.cemb)");

  RunFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train every seed and write checkpoints and metrics");
  AddRunFlags(train_cmd, train_flags);

  RunFlags eval_flags;
  std::vector<std::string> eval_checkpoints;
  std::string eval_run_dir, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on their test split");
  eval_cmd->add_option("--checkpoint", eval_checkpoints, "Checkpoint file (repeatable)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--run-dir", eval_run_dir, "Evaluate every checkpoint a train run wrote");
  eval_cmd->add_option("--data", eval_flags.data, "Override the dataset CSV")->check(CLI::ExistingFile);
  eval_cmd->add_option("--schema", eval_flags.schema, "Override the schema")->check(CLI::ExistingFile);
  eval_cmd->add_option("--store", eval_flags.store, "Override the embedding store")->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Also write the metrics JSON here");
  eval_cmd->add_option("--out-dir", eval_flags.out_dir, "Write eval_predictions.csv here");

  RunFlags bench_flags;
  std::vector<std::string> bench_checkpoints;
  auto* bench_cmd = app.add_subcommand("corrupt-bench", "Test-split corruption robustness curve");
  AddRunFlags(bench_cmd, bench_flags);
  bench_cmd->add_option("--checkpoint", bench_checkpoints, "Use trained checkpoints instead of training")
      ->check(CLI::ExistingFile);

  std::uint64_t grad_seed = 0;
  double grad_tolerance = 1e-3;
  auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference gradient suite at toy sizes");
  grad_cmd->add_option("--seed", grad_seed, "Seed of the random inputs and weights");
  grad_cmd->add_option("--tolerance", grad_tolerance, "Largest accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError(kExitUsage, "usage", e.what());
  }

  try {
    if (synth_cmd->parsed()) return RunSynth(synth);
    if (prompts_cmd->parsed()) return RunPrompts(prompts_flags, prompts_out);
    if (embed_cmd->parsed()) return RunEmbedHash(embed_flags, embed_prompts, embed_dim, embed_seed, embed_out);
    if (train_cmd->parsed()) return RunTrain(train_flags);
    if (eval_cmd->parsed()) return RunEval(eval_flags, eval_checkpoints, eval_run_dir, eval_out);
    if (bench_cmd->parsed()) return RunCorruptBench(bench_flags, bench_checkpoints);
    if (grad_cmd->parsed()) return RunGradCheck(grad_seed, grad_tolerance);
  } catch (const CheckFailure& e) {
    return ReportError(kExitCheck, "check", e.what());
  } catch (const InvalidArgument& e) {
    return ReportError(kExitUsage, "usage", e.what());
  } catch (const DataError& e) {
    return ReportError(kExitData, "data", e.what());
  } catch (const StoreMiss& e) {
    return ReportError(kExitData, "store_miss", e.what());
  } catch (const Error& e) {
    return ReportError(kExitData, "format", e.what());
  } catch (const nlohmann::json::exception& e) {
    return ReportError(kExitData, "format", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return ReportError(kExitData, "io", e.what());
  }
  return kExitUsage;
}
