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
// Acceptance gate. Runs every primary acceptance criterion and prints one
// PASS/FAIL line per criterion. Exits non-zero when any criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/model/cell_transformer.hpp"
#include "cellformer/model/grad_suite.hpp"
#include "cellformer/model/heads.hpp"
#include "cellformer/model/metrics.hpp"
#include "cellformer/random.hpp"
#include "cellformer/train/config.hpp"
#include "cellformer/train/experiment.hpp"

namespace cellformer {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failures inside one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  bool ok() const { return !failed_; }
  std::string Failures() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    return out;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string Fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// ---- 1. Gradient suite ----

Outcome GradientSuite() {
  const auto start = Clock::now();
  Check check;
  double worst = 0.0;
  bool saw_model[3] = {false, false, false};
  const auto entries = RunGradientSuite(0);
  for (const auto& e : entries) {
    worst = std::max(worst, e.report.max_rel_err);
    check.Expect(e.report.max_rel_err < 1e-3 && e.report.checked > 0, e.name + " rel err " + Fmt(e.report.max_rel_err));
    if (e.name == "model_or") saw_model[0] = true;
    if (e.name == "model_ce") saw_model[1] = true;
    if (e.name == "model_coral") saw_model[2] = true;
  }
  check.Expect(saw_model[0] && saw_model[1] && saw_model[2], "full-model checks for all three heads");
  const double seconds = Seconds(start);
  check.Expect(seconds < 120.0, "runtime " + Fmt(seconds) + " s");
  return {check.ok(), std::to_string(entries.size()) + " checks, max rel err " + Fmt(worst) + ", " + Fmt(seconds) +
                          " s" + (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 2. Structural invariants ----

ad::Tensor RandomMatrix(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.Uniform(-1.0, 1.0);
  return ad::Tensor::Constant({rows, cols}, std::move(v));
}

ad::Tensor PermuteRows(const ad::Tensor& x, const std::vector<std::size_t>& order) {
  std::vector<double> v;
  for (auto r : order)
    for (std::size_t c = 0; c < x.cols(); ++c) v.push_back(x.at(r, c));
  return ad::Tensor::Constant(x.shape(), std::move(v));
}

Outcome StructuralInvariants() {
  Check check;
  double worst_equivariance = 0.0, worst_invariance = 0.0, worst_row_sum = 0.0;
  EncoderConfig config;
  config.input_dim = 12;
  config.model_dim = 16;
  config.layers = 2;
  config.heads = 4;
  ParameterSet params;
  Rng rng(20260);
  const CellTransformer encoder(config, params, rng);
  for (std::size_t m : {1u, 2u, 5u, 8u}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      rng.Shuffle(std::span<std::size_t>(order));
      const auto z = RandomMatrix(rng, m, 16);
      for (std::size_t l = 0; l < config.layers; ++l) {
        std::vector<ad::Tensor> attention;
        const auto base = PermuteRows(encoder.Layer(l, z, &attention), order);
        const auto moved = encoder.Layer(l, PermuteRows(z, order));
        for (std::size_t i = 0; i < base.size(); ++i)
          worst_equivariance = std::max(worst_equivariance, std::abs(base[i] - moved[i]));
        for (const auto& a : attention)
          for (std::size_t r = 0; r < m; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < m; ++c) total += a.at(r, c);
            worst_row_sum = std::max(worst_row_sum, std::abs(total - 1.0));
          }
      }
      const auto cells = RandomMatrix(rng, m, 12);
      std::vector<bool> mask(m);
      for (std::size_t j = 0; j < m; ++j) mask[j] = rng.Bernoulli(0.7);
      mask[rng.UniformInt(m)] = true;
      std::vector<bool> moved_mask;
      for (auto r : order) moved_mask.push_back(mask[r]);
      const auto pooled = encoder.Forward(cells, mask);
      const auto moved = encoder.Forward(PermuteRows(cells, order), moved_mask);
      for (std::size_t i = 0; i < pooled.size(); ++i)
        worst_invariance = std::max(worst_invariance, std::abs(pooled[i] - moved[i]));
      const auto tampered = encoder.Forward(cells, mask, [&](const ad::Tensor& o) {
        std::vector<double> v(o.values().begin(), o.values().end());
        for (std::size_t r = 0; r < m; ++r)
          if (!mask[r])
            for (std::size_t c = 0; c < o.cols(); ++c) v[r * o.cols() + c] = rng.Uniform(-1e3, 1e3);
        return ad::Tensor::Constant(o.shape(), std::move(v));
      });
      bool same = true;
      for (std::size_t i = 0; i < pooled.size(); ++i) same &= tampered[i] == pooled[i];
      check.Expect(same, "masked rows changed the pooled embedding (m = " + std::to_string(m) + ")");
    }
  }
  check.Expect(worst_equivariance <= 1e-9, "layer equivariance error " + Fmt(worst_equivariance));
  check.Expect(worst_invariance <= 1e-9, "pooling invariance error " + Fmt(worst_invariance));
  check.Expect(worst_row_sum <= 1e-9, "attention row-sum error " + Fmt(worst_row_sum));
  return {check.ok(), "equivariance " + Fmt(worst_equivariance) + ", invariance " + Fmt(worst_invariance) +
                          ", row sums " + Fmt(worst_row_sum) + (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 3. Head oracles ----

double LogSigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

Outcome HeadOracles() {
  Check check;
  double worst = 0.0;
  const int y[] = {0, 2, 3};
  // OR, K = 4: columns (o0_k, o1_k) per task.
  const std::vector<double> o = {0.3, -0.2, -1.1, 0.4, 0.9, 0.9,  //
                                 1.5, 2.5, -0.3, 0.7, 0.0, -2.0,  //
                                 -0.5, 0.6, 0.2, 1.9, -1.0, -0.4};
  double or_expected = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const double o0 = o[6 * i + 2 * k], o1 = o[6 * i + 2 * k + 1];
      const double p = std::exp(o1) / (std::exp(o1) + std::exp(o0));
      or_expected -= y[i] > k ? std::log(p) : std::log(1.0 - p);
    }
  or_expected /= 3.0;
  const double or_err = std::abs(OrdinalLoss(ad::Tensor::Constant({3, 6}, o), y).item() - or_expected);

  const std::vector<double> g = {0.8, 0.1, -0.6, -2.0, 1.5, 0.2, 0.0, -0.3, -0.9};
  double coral_expected = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      coral_expected -= y[i] > k ? LogSigmoid(g[3 * i + k]) : LogSigmoid(-g[3 * i + k]);
  coral_expected /= 9.0;
  const double coral_err = std::abs(CoralLoss(ad::Tensor::Constant({3, 3}, g), y).item() - coral_expected);

  const std::vector<double> c = {0.5, -1.0, 2.0, 0.1, 1.5, 0.0, -0.5, 0.3, 0.2, -0.7, 1.1, 0.4};
  double ce_expected = 0.0;
  for (int i = 0; i < 3; ++i) {
    double z = 0.0;
    for (int k = 0; k < 4; ++k) z += std::exp(c[4 * i + k]);
    ce_expected -= c[4 * i + y[i]] - std::log(z);
  }
  ce_expected /= 3.0;
  const double ce_err = std::abs(CrossEntropyLoss(ad::Tensor::Constant({3, 4}, c), y).item() - ce_expected);
  worst = std::max({or_err, coral_err, ce_err});
  check.Expect(or_err <= 1e-9, "or loss error " + Fmt(or_err));
  check.Expect(coral_err <= 1e-9, "coral loss error " + Fmt(coral_err));
  check.Expect(ce_err <= 1e-9, "ce loss error " + Fmt(ce_err));

  // Decode against brute-force counting over the 0.1 probability grid.
  std::size_t vectors = 0;
  for (int K = 2; K <= 6; ++K) {
    const int tasks = K - 1;
    ParameterSet params;
    Rng rng(1);
    const RankHead or_head(HeadKind::kOrdinal, 2, 2, K, params, rng, "or");
    const RankHead coral_head(HeadKind::kCoral, 2, 2, K, params, rng, "coral");
    std::vector<double> or_rows, coral_rows;
    std::vector<int> expected;
    std::vector<int> digit(tasks, 0);
    for (bool done = false; !done;) {
      int count = 0;
      for (int k = 0; k < tasks; ++k) {
        const double p = digit[k] / 10.0;
        if (p > 0.5) ++count;
        const double logit = digit[k] == 0 ? -50.0 : digit[k] == 10 ? 50.0 : std::log(p / (1.0 - p));
        or_rows.insert(or_rows.end(), {0.0, logit});
        coral_rows.push_back(logit);
      }
      expected.push_back(count);
      int k = 0;
      while (k < tasks && ++digit[k] == 11) digit[k++] = 0;
      done = k == tasks;
    }
    const auto n = expected.size();
    vectors += n;
    const auto t = static_cast<std::size_t>(tasks);
    check.Expect(or_head.Decode(ad::Tensor::Constant({n, 2 * t}, or_rows)) == expected,
                 "or decode grid K = " + std::to_string(K));
    check.Expect(coral_head.Decode(ad::Tensor::Constant({n, t}, coral_rows)) == expected,
                 "coral decode grid K = " + std::to_string(K));
  }
  return {check.ok(), "max loss error " + Fmt(worst) + ", " + std::to_string(vectors) + " grid vectors" +
                          (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 4. Round trip ----

Outcome RoundTrip() {
  Check check;
  std::size_t cases = 0;
  for (int K = 2; K <= 10; ++K) {
    ParameterSet params;
    Rng rng(2);
    const RankHead or_head(HeadKind::kOrdinal, 2, 2, K, params, rng, "or");
    const RankHead coral_head(HeadKind::kCoral, 2, 2, K, params, rng, "coral");
    for (int y = 0; y < K; ++y) {
      std::vector<double> or_row, coral_row;
      for (int t : ExpandTargets(y, K)) {
        or_row.insert(or_row.end(), {0.0, t ? 30.0 : -30.0});
        coral_row.push_back(t ? 30.0 : -30.0);
      }
      const auto tasks = static_cast<std::size_t>(K - 1);
      check.Expect(or_head.Decode(ad::Tensor::Constant({1, 2 * tasks}, or_row)) == std::vector<int>{y},
                   "or K = " + std::to_string(K) + " y = " + std::to_string(y));
      check.Expect(coral_head.Decode(ad::Tensor::Constant({1, tasks}, coral_row)) == std::vector<int>{y},
                   "coral K = " + std::to_string(K) + " y = " + std::to_string(y));
      ++cases;
    }
  }
  return {check.ok(), std::to_string(cases) + " (y, K) pairs" + (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 5-7. Training criteria on the synthetic text-signal dataset ----

TrainConfig ToyConfig(HeadKind head, Architecture model) {
  TrainConfig config;
  config.model = model;
  config.head = head;
  config.learning_rate = 1e-3;
  config.encoder.model_dim = 32;
  config.encoder.layers = 2;
  config.encoder.heads = 2;
  config.embedder.dim = 64;
  config.synth.n = 1000;
  return config;
}

struct ToyRuns {
  TrainConfig or_config = ToyConfig(HeadKind::kOrdinal, Architecture::kCellTransformer);
  std::unique_ptr<InputPipeline> pipeline;
  RunResult or_run, ce_run, mlp_run;
  double or_seconds = 0.0;
  std::size_t max_epochs_run = 0;
};

ToyRuns& Runs() {
  static ToyRuns runs = [] {
    ToyRuns r;
    const auto data = LoadConfiguredData(r.or_config);
    r.pipeline = std::make_unique<InputPipeline>(r.or_config, data);
    auto start = Clock::now();
    r.or_run = RunExperiment(r.or_config, *r.pipeline);
    r.or_seconds = Seconds(start);
    for (const auto& s : r.or_run.seeds) r.max_epochs_run = std::max(r.max_epochs_run, s.history.size());
    const auto ce_config = ToyConfig(HeadKind::kCrossEntropy, Architecture::kCellTransformer);
    r.ce_run = RunExperiment(ce_config, InputPipeline(ce_config, data));
    const auto mlp_config = ToyConfig(HeadKind::kOrdinal, Architecture::kMlp);
    r.mlp_run = RunExperiment(mlp_config, InputPipeline(mlp_config, data));
    return r;
  }();
  return runs;
}

Outcome LearningCheck() {
  auto& r = Runs();
  Check check;
  check.Expect(r.pipeline->train().size() == 600 && r.pipeline->val().size() == 200 && r.pipeline->test().size() == 200,
               "3:1:1 split of 1000 rows");
  double worst = 0.0;
  for (const auto& s : r.or_run.seeds) {
    worst = std::max(worst, s.test.mae);
    check.Expect(s.test.mae <= 0.10, "seed " + std::to_string(s.seed) + " test MAE " + Fmt(s.test.mae));
  }
  check.Expect(r.max_epochs_run <= 100, "epochs " + std::to_string(r.max_epochs_run));
  const double per_seed = r.or_seconds / static_cast<double>(r.or_run.seeds.size());
  check.Expect(per_seed < 300.0, "training time " + Fmt(per_seed) + " s");
  check.Expect(r.mlp_run.mean.mae >= 1.0, "MLP mean test MAE " + Fmt(r.mlp_run.mean.mae));
  return {check.ok(), "OR worst-seed test MAE " + Fmt(worst) + " (mean " + Fmt(r.or_run.mean.mae) + ", " +
                          Fmt(per_seed) + " s/seed), MLP mean test MAE " + Fmt(r.mlp_run.mean.mae) +
                          (check.ok() ? "" : " | " + check.Failures())};
}

Outcome HeadOrdering() {
  auto& r = Runs();
  Check check;
  check.Expect(r.or_run.seeds.size() == 5 && r.ce_run.seeds.size() == 5, "five seeds per head");
  check.Expect(r.or_run.mean.rmse <= r.ce_run.mean.rmse + 0.05,
               "OR " + Fmt(r.or_run.mean.rmse) + " vs CE " + Fmt(r.ce_run.mean.rmse));
  return {check.ok(), "mean test RMSE OR " + Fmt(r.or_run.mean.rmse) + ", CE " + Fmt(r.ce_run.mean.rmse) +
                          (check.ok() ? "" : " | " + check.Failures())};
}

Outcome CorruptionCurve() {
  auto& r = Runs();
  Check check;
  const std::vector<double> rates = {0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<std::pair<std::uint64_t, std::vector<CurvePoint>>> curves;
  for (const auto& s : r.or_run.seeds) {
    auto curve = CorruptionBenchmark(*s.model, *r.pipeline, rates, s.seed);
    check.Expect(curve.size() == rates.size(), "curve rows");
    for (std::size_t i = 0; i < curve.size() && i < rates.size(); ++i)
      check.Expect(curve[i].rate == rates[i], "rate order");
    check.Expect(curve.front().metrics == Evaluate(*s.model, r.pipeline->test()).metrics,
                 "rate 0 differs from plain evaluation, seed " + std::to_string(s.seed));
    curves.emplace_back(s.seed, std::move(curve));
  }
  const auto mean = AverageCurves(curves);
  std::string table;
  for (const auto& p : mean) table += (table.empty() ? "" : " ") + Fmt(p.rate) + ":" + Fmt(p.metrics.rmse);
  check.Expect(mean.back().metrics.rmse >= mean.front().metrics.rmse - 0.05,
               "RMSE(0.2) " + Fmt(mean.back().metrics.rmse) + " < RMSE(0) - 0.05");
  return {check.ok(), "mean RMSE by rate " + table + (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 8. Determinism through the CLI ----

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome Determinism() {
  Check check;
  const auto dir = fs::temp_directory_path() / "cellformer_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"learning_rate": 0.001, "seeds": [7],
    "encoder": {"model_dim": 32, "layers": 2, "heads": 2}, "embedder": {"kind": "hash", "dim": 64},
    "synth": {"n": 1000}})";
  for (const char* name : {"a", "b"}) {
    const std::string command = std::string("\"") + CELLFORMER_CLI + "\" train --config \"" +
                                (dir / "config.json").string() + "\" --seed 7 --out-dir \"" + (dir / name).string() +
                                "\" > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    check.Expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string("train run ") + name + " failed");
  }
  const auto a = Slurp(dir / "a" / "metrics.json");
  const auto b = Slurp(dir / "b" / "metrics.json");
  check.Expect(!a.empty(), "metrics.json written");
  check.Expect(a == b, "metrics.json differs between runs");
  fs::remove_all(dir);
  return {check.ok(), std::to_string(a.size()) + "-byte metrics.json identical across two runs" +
                          (check.ok() ? "" : " | " + check.Failures())};
}

// ---- 9. Metrics ----

Outcome Metrics() {
  Check check;
  const int same[] = {0, 3, 4};
  check.Expect(ComputeMetrics(same, same) == RankMetrics{0.0, 0.0}, "pred = truth gives 0/0");
  const int p1[] = {0, 2}, t1[] = {1, 1};
  check.Expect(Rmse(p1, t1) == 1.0 && Mae(p1, t1) == 1.0, "[0,2] vs [1,1]");
  const int p2[] = {0}, t2[] = {4};
  check.Expect(Rmse(p2, t2) == 4.0 && Mae(p2, t2) == 4.0, "[0] vs [4]");
  Rng rng(7);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(100);
    std::vector<int> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.UniformInt(5));
      t[i] = static_cast<int>(rng.UniformInt(5));
    }
    violations += Mae(p, t) > Rmse(p, t) + 1e-12;
  }
  check.Expect(violations == 0, std::to_string(violations) + " MAE > RMSE cases");
  return {check.ok(), "examples exact, MAE <= RMSE over 1000 random vectors" +
                          (check.ok() ? "" : " | " + check.Failures())};
}

}  // namespace
}  // namespace cellformer

int main() {
  using namespace cellformer;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient-suite", GradientSuite},
      {"structural-invariants", StructuralInvariants},
      {"ordinal-head-oracles", HeadOracles},
      {"expand-decode-round-trip", RoundTrip},
      {"learning-check", LearningCheck},
      {"head-ordering", HeadOrdering},
      {"corruption-benchmark", CorruptionCurve},
      {"determinism", Determinism},
      {"metrics", Metrics},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.ok;
    std::printf("%s %s: %s\n", outcome.ok ? "PASS" : "FAIL", name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
