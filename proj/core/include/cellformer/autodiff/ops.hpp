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
#ifndef CELLFORMER_AUTODIFF_OPS_HPP_
#define CELLFORMER_AUTODIFF_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "cellformer/autodiff/tensor.hpp"

namespace cellformer::ad {

// Matrix operations treat rank-1 tensors as a single row.

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// Elementwise; shapes must match exactly.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double factor);

// Adds a length-cols bias to every row of an n x cols matrix.
Tensor AddRowBroadcast(const Tensor& a, const Tensor& bias);

// max(0, x); the gradient at exactly 0 is 0.
Tensor Relu(const Tensor& a);
Tensor Log(const Tensor& a);
Tensor Exp(const Tensor& a);
// log(1 + exp(x)), evaluated without overflow.
Tensor Softplus(const Tensor& a);
Tensor Sigmoid(const Tensor& a);

Tensor ConcatCols(std::span<const Tensor> parts);
Tensor ConcatRows(std::span<const Tensor> parts);
Tensor SliceCols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor SliceRows(const Tensor& a, std::size_t begin, std::size_t count);

// Row-wise softmax with max subtraction.
Tensor SoftmaxRows(const Tensor& x);
Tensor LogSoftmaxRows(const Tensor& x);

// Per row: (x - mean) / sqrt(var + eps) * gamma + beta with the population
// variance.
Tensor LayerNormRows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

// Mean over the rows whose mask entry is true; returns a rank-1 tensor of
// length cols. Throws InvalidArgument when no entry is true.
Tensor MaskedMeanRows(const Tensor& x, const std::vector<bool>& mask);

Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);

}  // namespace cellformer::ad

#endif  // CELLFORMER_AUTODIFF_OPS_HPP_
