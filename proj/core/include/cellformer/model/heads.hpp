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
#ifndef CELLFORMER_MODEL_HEADS_HPP_
#define CELLFORMER_MODEL_HEADS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellformer/autodiff/tensor.hpp"
#include "cellformer/model/parameters.hpp"

namespace cellformer {

enum class HeadKind {
  kCrossEntropy,  // K-way softmax
  kOrdinal,       // K-1 two-neuron "rank > k" subtasks
  kCoral,         // one shared weight vector, K-1 biases
};

std::string_view HeadName(HeadKind kind);
// "ce", "or", "coral"
HeadKind ParseHead(std::string_view name);

// Binary subtask targets: element k is 1 when y > k, for k = 0..K-2.
std::vector<int> ExpandTargets(int y, int num_ranks);

// ---- Losses on raw head outputs ----
//
// OR outputs are N x 2(K-1) with columns (o0_k, o1_k) for each task k;
// P(o1_k) = exp(o1) / (exp(o1) + exp(o0)).

// -(1/N) sum_i sum_k [y log P + (1 - y) log(1 - P)]. Normalised by N only.
ad::Tensor OrdinalLoss(const ad::Tensor& outputs, std::span<const int> labels);
// Mean over samples of -log softmax at the true rank.
ad::Tensor CrossEntropyLoss(const ad::Tensor& logits, std::span<const int> labels);
// Binary cross-entropy of logistic(g_k) against ExpandTargets, averaged over
// samples and tasks. `logits` is N x (K-1).
ad::Tensor CoralLoss(const ad::Tensor& logits, std::span<const int> labels);

// ---- Decoders ----

// Number of task probabilities strictly above 0.5.
int CountDecode(std::span<const double> probabilities);
// Argmax with ties going to the lowest index.
int ArgmaxDecode(std::span<const double> logits);

// Per-task P(o1_k) of one OR output row.
std::vector<double> OrdinalProbabilities(std::span<const double> row);
std::vector<double> LogisticProbabilities(std::span<const double> logits);
std::vector<double> SoftmaxProbabilities(std::span<const double> logits);

// Two-layer feed-forward head: relu(p W1 + b1) followed by the output layer
// of the chosen kind. Accepts an N x input_dim batch of patient embeddings.
class RankHead {
 public:
  RankHead(HeadKind kind, std::size_t input_dim, std::size_t hidden_dim, int num_ranks,
           ParameterSet& params, Rng& rng, const std::string& prefix = "head");

  HeadKind kind() const { return kind_; }
  int num_ranks() const { return num_ranks_; }
  // Width of one output row: K, 2(K-1) or K-1.
  std::size_t output_width() const;

  ad::Tensor Forward(const ad::Tensor& patients) const;
  ad::Tensor Loss(const ad::Tensor& outputs, std::span<const int> labels) const;
  std::vector<int> Decode(const ad::Tensor& outputs) const;
  // Class probabilities (CE) or per-task probabilities (OR, CORAL), per row.
  std::vector<std::vector<double>> Probabilities(const ad::Tensor& outputs) const;

  // CORAL only: are the task biases in non-increasing order, which makes the
  // task probabilities non-increasing for every input.
  bool CoralBiasesSorted() const;

 private:
  HeadKind kind_;
  int num_ranks_;
  Linear hidden_;
  Linear output_;          // CE and OR
  ad::Tensor coral_weight_;  // hidden x 1, no bias
  ad::Tensor coral_bias_;    // K-1
};

}  // namespace cellformer

#endif  // CELLFORMER_MODEL_HEADS_HPP_
