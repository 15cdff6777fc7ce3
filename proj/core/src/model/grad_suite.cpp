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
#include "cellformer/model/grad_suite.hpp"

#include <cmath>
#include <functional>

#include "cellformer/autodiff/ops.hpp"
#include "cellformer/model/heads.hpp"
#include "cellformer/model/rank_model.hpp"
#include "cellformer/random.hpp"

namespace cellformer {
namespace {

using ad::Shape;
using ad::Tensor;

Tensor RandomVariable(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(ad::ShapeSize(shape));
  for (auto& x : v) x = rng.Uniform(lo, hi);
  return Tensor::Variable(std::move(shape), std::move(v));
}

// Values in [0.1, 1] with a random sign, so nothing sits at a ReLU kink.
Tensor AwayFromZero(Rng& rng, Shape shape) {
  std::vector<double> v(ad::ShapeSize(shape));
  for (auto& x : v) x = rng.Uniform(0.1, 1.0) * (rng.Bernoulli(0.5) ? 1.0 : -1.0);
  return Tensor::Variable(std::move(shape), std::move(v));
}

Tensor Project(const Tensor& y, Rng& rng) {
  std::vector<double> w(y.size());
  for (auto& x : w) x = rng.Uniform(-1.0, 1.0);
  return ad::Sum(ad::Mul(y, Tensor::Constant(y.shape(), std::move(w))));
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed) {}

  // `inputs` are the leaves; `f` rebuilds the op from them.
  void Op(const std::string& name, std::vector<Tensor> inputs,
          const std::function<Tensor(const std::vector<Tensor>&)>& f) {
    const std::uint64_t projection_seed = rng_.NextU64();
    auto loss = [&] {
      Rng r(projection_seed);
      return Project(f(inputs), r);
    };
    entries_.push_back({name, ad::GradCheck(loss, inputs)});
  }

  void Loss(const std::string& name, std::vector<Tensor> inputs, const std::function<Tensor()>& loss) {
    entries_.push_back({name, ad::GradCheck(loss, inputs)});
  }

  Rng& rng() { return rng_; }
  std::vector<GradSuiteEntry> Take() { return std::move(entries_); }

 private:
  Rng rng_;
  std::vector<GradSuiteEntry> entries_;
};

void OperationChecks(Suite& s) {
  auto& r = s.rng();
  s.Op("matmul", {RandomVariable(r, {3, 4}), RandomVariable(r, {4, 2})},
       [](const auto& x) { return ad::MatMul(x[0], x[1]); });
  s.Op("transpose", {RandomVariable(r, {3, 4})}, [](const auto& x) { return ad::Transpose(x[0]); });
  s.Op("add", {RandomVariable(r, {2, 3}), RandomVariable(r, {2, 3})},
       [](const auto& x) { return ad::Add(x[0], x[1]); });
  s.Op("sub", {RandomVariable(r, {2, 3}), RandomVariable(r, {2, 3})},
       [](const auto& x) { return ad::Sub(x[0], x[1]); });
  s.Op("mul", {RandomVariable(r, {2, 3}), RandomVariable(r, {2, 3})},
       [](const auto& x) { return ad::Mul(x[0], x[1]); });
  s.Op("scale", {RandomVariable(r, {2, 3})}, [](const auto& x) { return ad::Scale(x[0], -1.7); });
  s.Op("add_row_broadcast", {RandomVariable(r, {3, 4}), RandomVariable(r, {4})},
       [](const auto& x) { return ad::AddRowBroadcast(x[0], x[1]); });
  s.Op("relu", {AwayFromZero(r, {3, 4})}, [](const auto& x) { return ad::Relu(x[0]); });
  s.Op("log", {RandomVariable(r, {2, 3}, 0.2, 2.0)}, [](const auto& x) { return ad::Log(x[0]); });
  s.Op("exp", {RandomVariable(r, {2, 3})}, [](const auto& x) { return ad::Exp(x[0]); });
  s.Op("softplus", {RandomVariable(r, {2, 3}, -4.0, 4.0)}, [](const auto& x) { return ad::Softplus(x[0]); });
  s.Op("sigmoid", {RandomVariable(r, {2, 3}, -4.0, 4.0)}, [](const auto& x) { return ad::Sigmoid(x[0]); });
  s.Op("concat_cols", {RandomVariable(r, {2, 3}), RandomVariable(r, {2, 2})},
       [](const auto& x) { return ad::ConcatCols(x); });
  s.Op("concat_rows", {RandomVariable(r, {2, 3}), RandomVariable(r, {3})},
       [](const auto& x) { return ad::ConcatRows(x); });
  s.Op("slice_cols", {RandomVariable(r, {3, 5})}, [](const auto& x) { return ad::SliceCols(x[0], 1, 3); });
  s.Op("slice_rows", {RandomVariable(r, {4, 3})}, [](const auto& x) { return ad::SliceRows(x[0], 1, 2); });
  s.Op("softmax_rows", {RandomVariable(r, {3, 4}, -2.0, 2.0)}, [](const auto& x) { return ad::SoftmaxRows(x[0]); });
  s.Op("log_softmax_rows", {RandomVariable(r, {3, 4}, -2.0, 2.0)},
       [](const auto& x) { return ad::LogSoftmaxRows(x[0]); });
  s.Op("layernorm_rows", {RandomVariable(r, {3, 5}), RandomVariable(r, {5}), RandomVariable(r, {5})},
       [](const auto& x) { return ad::LayerNormRows(x[0], x[1], x[2], 1e-5); });
  s.Op("masked_mean_rows", {RandomVariable(r, {4, 3})},
       [](const auto& x) { return ad::MaskedMeanRows(x[0], {true, false, true, true}); });
  s.Op("sum", {RandomVariable(r, {2, 3})}, [](const auto& x) { return ad::Sum(x[0]); });
  s.Op("mean", {RandomVariable(r, {2, 3})}, [](const auto& x) { return ad::Mean(x[0]); });
}

void LossChecks(Suite& s) {
  auto& r = s.rng();
  const std::vector<int> labels = {0, 2, 3};
  {
    std::vector<Tensor> x = {RandomVariable(r, {3, 6}, -2.0, 2.0)};
    s.Loss("or_loss", x, [x, labels] { return OrdinalLoss(x[0], labels); });
  }
  {
    std::vector<Tensor> x = {RandomVariable(r, {3, 4}, -2.0, 2.0)};
    s.Loss("ce_loss", x, [x, labels] { return CrossEntropyLoss(x[0], labels); });
  }
  {
    std::vector<Tensor> x = {RandomVariable(r, {3, 3}, -2.0, 2.0)};
    s.Loss("coral_loss", x, [x, labels] { return CoralLoss(x[0], labels); });
  }
}

EmbeddedSample RandomSample(Rng& rng, std::size_t rows, std::size_t dim, std::vector<bool> mask) {
  EmbeddedSample s;
  s.rows = rows;
  s.dim = dim;
  s.mask = std::move(mask);
  s.matrix.resize(rows * dim);
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t c = 0; c < dim; ++c)
      s.matrix[j * dim + c] = s.mask[j] ? rng.Uniform(-1.0, 1.0) : 0.0;
  return s;
}

void ModelCheck(Suite& s, const std::string& name, const ModelSpec& spec,
                const std::vector<EmbeddedSample>& batch, const std::vector<int>& labels) {
  RankModel model(spec);
  std::vector<const EmbeddedSample*> pointers;
  for (const auto& b : batch) pointers.push_back(&b);
  std::vector<Tensor> inputs;
  for (const auto& p : model.parameters().items()) {
    if (p.trainable) inputs.push_back(p.tensor);
  }
  s.Loss(name, inputs, [&] { return model.Loss(model.Forward(pointers), labels); });
}

void ModelChecks(Suite& s) {
  auto& r = s.rng();
  const std::size_t dim = 6;
  std::vector<EmbeddedSample> cells = {
      RandomSample(r, 4, dim, {true, true, true, true}),
      RandomSample(r, 5, dim, {true, false, true, true, false}),
      RandomSample(r, 6, dim, {false, true, true, true, true, true}),
  };
  const std::vector<int> labels = {1, 3, 0};
  ModelSpec spec;
  spec.encoder.input_dim = dim;
  spec.encoder.model_dim = 8;
  spec.encoder.layers = 2;
  spec.encoder.heads = 2;
  spec.num_ranks = 4;
  for (auto head : {HeadKind::kOrdinal, HeadKind::kCrossEntropy, HeadKind::kCoral}) {
    spec.head = head;
    spec.init_seed = r.NextU64();
    ModelCheck(s, "model_" + std::string(HeadName(head)), spec, cells, labels);
  }
  ModelSpec mlp = spec;
  mlp.architecture = Architecture::kMlp;
  mlp.mlp_hidden = 8;
  mlp.head = HeadKind::kOrdinal;
  std::vector<EmbeddedSample> rows = {RandomSample(r, 1, dim, {true}), RandomSample(r, 1, dim, {true}),
                                      RandomSample(r, 1, dim, {true})};
  ModelCheck(s, "model_mlp_or", mlp, rows, labels);
}

}  // namespace

std::vector<GradSuiteEntry> RunGradientSuite(std::uint64_t seed) {
  Suite suite(seed);
  OperationChecks(suite);
  LossChecks(suite);
  ModelChecks(suite);
  return suite.Take();
}

}  // namespace cellformer
