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
#include "cellformer/model/heads.hpp"

#include <algorithm>
#include <cmath>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/error.hpp"

namespace cellformer {
namespace {

void CheckLabels(const ad::Tensor& outputs, std::span<const int> labels, int num_ranks) {
  if (labels.empty()) throw InvalidArgument("loss needs a non-empty batch");
  if (outputs.rows() != labels.size()) {
    throw ShapeError("batch has " + std::to_string(outputs.rows()) + " output rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_ranks) {
      throw InvalidArgument("rank " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_ranks - 1) + "]");
    }
  }
}

// N x (K-1) matrix of ExpandTargets rows.
ad::Tensor TargetMatrix(std::span<const int> labels, int num_ranks) {
  const std::size_t tasks = static_cast<std::size_t>(num_ranks - 1);
  std::vector<double> values;
  values.reserve(labels.size() * tasks);
  for (int y : labels)
    for (int t : ExpandTargets(y, num_ranks)) values.push_back(t);
  return ad::Tensor::Constant({labels.size(), tasks}, std::move(values));
}

// sum(Y * softplus(-g) + (1 - Y) * softplus(g)), i.e. summed binary
// cross-entropy of logistic(g).
ad::Tensor SummedBinaryCrossEntropy(const ad::Tensor& g, const ad::Tensor& targets) {
  std::vector<double> ones(targets.size(), 1.0);
  const auto complement =
      ad::Sub(ad::Tensor::Constant(targets.shape(), std::move(ones)), targets);
  return ad::Sum(ad::Add(ad::Mul(targets, ad::Softplus(ad::Scale(g, -1.0))),
                         ad::Mul(complement, ad::Softplus(g))));
}

double Logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view HeadName(HeadKind kind) {
  switch (kind) {
    case HeadKind::kCrossEntropy:
      return "ce";
    case HeadKind::kOrdinal:
      return "or";
    case HeadKind::kCoral:
      return "coral";
  }
  return "unknown";
}

HeadKind ParseHead(std::string_view name) {
  if (name == "ce") return HeadKind::kCrossEntropy;
  if (name == "or") return HeadKind::kOrdinal;
  if (name == "coral") return HeadKind::kCoral;
  throw InvalidArgument("unknown head '" + std::string(name) + "' (expected ce, or, coral)");
}

std::vector<int> ExpandTargets(int y, int num_ranks) {
  if (num_ranks < 2 || y < 0 || y >= num_ranks) {
    throw InvalidArgument("rank " + std::to_string(y) + " invalid for K = " + std::to_string(num_ranks));
  }
  std::vector<int> out(static_cast<std::size_t>(num_ranks - 1));
  for (int k = 0; k < num_ranks - 1; ++k) out[static_cast<std::size_t>(k)] = y > k ? 1 : 0;
  return out;
}

ad::Tensor OrdinalLoss(const ad::Tensor& outputs, std::span<const int> labels) {
  if (outputs.cols() < 2 || outputs.cols() % 2 != 0) {
    throw ShapeError("OR outputs need 2(K-1) columns, got " + ad::ShapeString(outputs.shape()));
  }
  const std::size_t tasks = outputs.cols() / 2;
  const int num_ranks = static_cast<int>(tasks) + 1;
  CheckLabels(outputs, labels, num_ranks);
  // Column k of diff is o1_k - o0_k; P(o1_k) = logistic(diff_k).
  std::vector<double> select(outputs.cols() * tasks, 0.0);
  for (std::size_t k = 0; k < tasks; ++k) {
    select[(2 * k) * tasks + k] = -1.0;
    select[(2 * k + 1) * tasks + k] = 1.0;
  }
  const auto diff =
      ad::MatMul(outputs, ad::Tensor::Constant({outputs.cols(), tasks}, std::move(select)));
  const auto total = SummedBinaryCrossEntropy(diff, TargetMatrix(labels, num_ranks));
  return ad::Scale(total, 1.0 / static_cast<double>(labels.size()));
}

ad::Tensor CrossEntropyLoss(const ad::Tensor& logits, std::span<const int> labels) {
  const int num_ranks = static_cast<int>(logits.cols());
  if (num_ranks < 2) throw ShapeError("CE logits need K >= 2 columns");
  CheckLabels(logits, labels, num_ranks);
  std::vector<double> one_hot(logits.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) one_hot[i * logits.cols() + labels[i]] = 1.0;
  const auto picked = ad::Mul(ad::Tensor::Constant(logits.shape(), std::move(one_hot)),
                              ad::LogSoftmaxRows(logits));
  return ad::Scale(ad::Sum(picked), -1.0 / static_cast<double>(labels.size()));
}

ad::Tensor CoralLoss(const ad::Tensor& logits, std::span<const int> labels) {
  const std::size_t tasks = logits.cols();
  const int num_ranks = static_cast<int>(tasks) + 1;
  CheckLabels(logits, labels, num_ranks);
  const auto total = SummedBinaryCrossEntropy(logits, TargetMatrix(labels, num_ranks));
  return ad::Scale(total, 1.0 / static_cast<double>(labels.size() * tasks));
}

int CountDecode(std::span<const double> probabilities) {
  return static_cast<int>(
      std::count_if(probabilities.begin(), probabilities.end(), [](double p) { return p > 0.5; }));
}

int ArgmaxDecode(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("argmax of an empty row");
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

std::vector<double> OrdinalProbabilities(std::span<const double> row) {
  std::vector<double> out(row.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = Logistic(row[2 * k + 1] - row[2 * k]);
  return out;
}

std::vector<double> LogisticProbabilities(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = Logistic(logits[k]);
  return out;
}

std::vector<double> SoftmaxProbabilities(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) total += (out[k] = std::exp(logits[k] - mx));
  for (auto& p : out) p /= total;
  return out;
}

RankHead::RankHead(HeadKind kind, std::size_t input_dim, std::size_t hidden_dim, int num_ranks,
                   ParameterSet& params, Rng& rng, const std::string& prefix)
    : kind_(kind), num_ranks_(num_ranks) {
  if (num_ranks < 2) throw InvalidArgument("a head needs K >= 2 ranks");
  if (input_dim == 0 || hidden_dim == 0) throw InvalidArgument("head dimensions must be >= 1");
  hidden_ = Linear::Create(params, prefix + ".hidden", input_dim, hidden_dim, rng);
  const auto tasks = static_cast<std::size_t>(num_ranks - 1);
  switch (kind_) {
    case HeadKind::kCrossEntropy:
      output_ = Linear::Create(params, prefix + ".out", hidden_dim, static_cast<std::size_t>(num_ranks), rng);
      break;
    case HeadKind::kOrdinal:
      output_ = Linear::Create(params, prefix + ".out", hidden_dim, 2 * tasks, rng);
      break;
    case HeadKind::kCoral: {
      coral_weight_ = params.AddUniform(prefix + ".coral.weight", {hidden_dim, 1}, hidden_dim, rng);
      // Linearly spaced from +1 down to -1.
      std::vector<double> bias(tasks, 0.0);
      for (std::size_t k = 0; k < tasks && tasks > 1; ++k)
        bias[k] = 1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(tasks - 1);
      coral_bias_ = params.Add(prefix + ".coral.bias", {tasks}, std::move(bias));
      break;
    }
  }
}

std::size_t RankHead::output_width() const {
  const auto k = static_cast<std::size_t>(num_ranks_);
  switch (kind_) {
    case HeadKind::kCrossEntropy:
      return k;
    case HeadKind::kOrdinal:
      return 2 * (k - 1);
    case HeadKind::kCoral:
      return k - 1;
  }
  return 0;
}

ad::Tensor RankHead::Forward(const ad::Tensor& patients) const {
  const auto features = ad::Relu(hidden_(patients));
  if (kind_ != HeadKind::kCoral) return output_(features);
  const auto score = ad::MatMul(features, coral_weight_);  // N x 1
  const auto tasks = static_cast<std::size_t>(num_ranks_ - 1);
  const auto spread = ad::Tensor::Constant({1, tasks}, std::vector<double>(tasks, 1.0));
  return ad::AddRowBroadcast(ad::MatMul(score, spread), coral_bias_);
}

ad::Tensor RankHead::Loss(const ad::Tensor& outputs, std::span<const int> labels) const {
  switch (kind_) {
    case HeadKind::kCrossEntropy:
      return CrossEntropyLoss(outputs, labels);
    case HeadKind::kOrdinal:
      return OrdinalLoss(outputs, labels);
    case HeadKind::kCoral:
      return CoralLoss(outputs, labels);
  }
  throw InvalidArgument("unknown head kind");
}

std::vector<std::vector<double>> RankHead::Probabilities(const ad::Tensor& outputs) const {
  std::vector<std::vector<double>> out;
  out.reserve(outputs.rows());
  const auto values = outputs.values();
  const std::size_t width = outputs.cols();
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    const auto row = values.subspan(i * width, width);
    switch (kind_) {
      case HeadKind::kCrossEntropy:
        out.push_back(SoftmaxProbabilities(row));
        break;
      case HeadKind::kOrdinal:
        out.push_back(OrdinalProbabilities(row));
        break;
      case HeadKind::kCoral:
        out.push_back(LogisticProbabilities(row));
        break;
    }
  }
  return out;
}

std::vector<int> RankHead::Decode(const ad::Tensor& outputs) const {
  std::vector<int> ranks;
  ranks.reserve(outputs.rows());
  if (kind_ == HeadKind::kCrossEntropy) {
    const auto values = outputs.values();
    for (std::size_t i = 0; i < outputs.rows(); ++i)
      ranks.push_back(ArgmaxDecode(values.subspan(i * outputs.cols(), outputs.cols())));
    return ranks;
  }
  for (const auto& probs : Probabilities(outputs)) ranks.push_back(CountDecode(probs));
  return ranks;
}

bool RankHead::CoralBiasesSorted() const {
  if (kind_ != HeadKind::kCoral) return true;
  const auto b = coral_bias_.values();
  return std::is_sorted(b.rbegin(), b.rend());
}

}  // namespace cellformer
