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
#include "cellformer/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cellformer/error.hpp"

namespace cellformer::ad {
namespace {

// Gradient buffer of parent `i`, or nullptr when that parent is a constant.
std::vector<double>* ParentGrad(Node& self, std::size_t i) {
  Node& parent = *self.parents[i];
  return parent.requires_grad ? &parent.mutable_grad() : nullptr;
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                     ShapeString(b.shape()));
  }
}

double StableSigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Forward, typename Derivative>
Tensor Unary(const Tensor& a, const char* op, Forward forward, Derivative derivative) {
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  return MakeResult(a.shape(), std::move(out), op, {a}, [derivative](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    const auto& x = self.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*g)[i] += self.grad[i] * derivative(x[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw ShapeError("MatMul: shape mismatch " + ShapeString(a.shape()) + " x " +
                     ShapeString(b.shape()));
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += aip * brow[j];
    }
  }
  return MakeResult({n, m}, std::move(out), "matmul", {a, b}, [n, k, m](Node& self) {
    const auto& A = self.parents[0]->value;
    const auto& B = self.parents[1]->value;
    const auto& dC = self.grad;
    if (auto* dA = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* brow = B.data() + p * m;
          const double* grow = dC.data() + i * m;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          (*dA)[i * k + p] += acc;
        }
      }
    }
    if (auto* dB = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = dC.data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          if (aip == 0.0) continue;
          double* brow = dB->data() + p * m;
          for (std::size_t j = 0; j < m; ++j) brow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor Transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  const auto in = a.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return MakeResult({c, r}, std::move(out), "transpose", {a}, [r, c](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += self.grad[j * r + i];
  });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return MakeResult(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = ParentGrad(self, p))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return MakeResult(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    if (auto* g = ParentGrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = ParentGrad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return MakeResult(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (auto* g = ParentGrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    if (auto* g = ParentGrad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
  });
}

Tensor Scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return MakeResult(a.shape(), std::move(out), "scale", {a}, [factor](Node& self) {
    if (auto* g = ParentGrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * factor;
  });
}

Tensor AddRowBroadcast(const Tensor& a, const Tensor& bias) {
  const std::size_t r = a.rows(), c = a.cols();
  if (bias.size() != c || bias.rows() != 1) {
    throw ShapeError("AddRowBroadcast: bias " + ShapeString(bias.shape()) + " vs matrix " +
                     ShapeString(a.shape()));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias[j];
  return MakeResult(a.shape(), std::move(out), "add_row", {a, bias}, [r, c](Node& self) {
    if (auto* g = ParentGrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = ParentGrad(self, 1))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) (*g)[j] += self.grad[i * c + j];
  });
}

Tensor Relu(const Tensor& a) {
  return Unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor Log(const Tensor& a) {
  return Unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor Exp(const Tensor& a) {
  return Unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor Softplus(const Tensor& a) {
  return Unary(
      a, "softplus",
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return StableSigmoid(x); });
}

Tensor Sigmoid(const Tensor& a) {
  return Unary(
      a, "sigmoid", [](double x) { return StableSigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("ConcatCols: no inputs");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) {
      throw ShapeError("ConcatCols: row mismatch " + ShapeString(parts[0].shape()) + " vs " +
                       ShapeString(p.shape()));
    }
    offsets.push_back(total);
    total += p.cols();
  }
  std::vector<double> out(r * total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t c = parts[k].cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out[i * total + offsets[k] + j] = parts[k].at(i, j);
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return MakeResult({r, total}, std::move(out), "concat_cols", std::move(parents),
                    [r, total, offsets](Node& self) {
                      for (std::size_t k = 0; k < self.parents.size(); ++k) {
                        auto* g = ParentGrad(self, k);
                        if (!g) continue;
                        const std::size_t c = g->size() / r;
                        for (std::size_t i = 0; i < r; ++i)
                          for (std::size_t j = 0; j < c; ++j)
                            (*g)[i * c + j] += self.grad[i * total + offsets[k] + j];
                      }
                    });
}

Tensor ConcatRows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t total = 0;
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw ShapeError("ConcatRows: column mismatch " + ShapeString(parts[0].shape()) + " vs " +
                       ShapeString(p.shape()));
    }
    total += p.rows();
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return MakeResult({total, c}, std::move(out), "concat_rows", std::move(parents),
                    [](Node& self) {
                      std::size_t offset = 0;
                      for (std::size_t k = 0; k < self.parents.size(); ++k) {
                        const std::size_t n = self.parents[k]->value.size();
                        if (auto* g = ParentGrad(self, k))
                          for (std::size_t i = 0; i < n; ++i) (*g)[i] += self.grad[offset + i];
                        offset += n;
                      }
                    });
}

Tensor SliceCols(const Tensor& a, std::size_t begin, std::size_t count) {
  const std::size_t r = a.rows(), c = a.cols();
  if (begin + count > c) {
    throw ShapeError("SliceCols: columns [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + ShapeString(a.shape()));
  }
  std::vector<double> out(r * count);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = a.at(i, begin + j);
  return MakeResult({r, count}, std::move(out), "slice_cols", {a}, [r, c, begin, count](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) (*g)[i * c + begin + j] += self.grad[i * count + j];
  });
}

Tensor SliceRows(const Tensor& a, std::size_t begin, std::size_t count) {
  const std::size_t r = a.rows(), c = a.cols();
  if (begin + count > r) {
    throw ShapeError("SliceRows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + ShapeString(a.shape()));
  }
  const auto in = a.values();
  std::vector<double> out(in.begin() + static_cast<std::ptrdiff_t>(begin * c),
                          in.begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return MakeResult({count, c}, std::move(out), "slice_rows", {a}, [begin, c](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[begin * c + i] += self.grad[i];
  });
}

Tensor SoftmaxRows(const Tensor& x) {
  const std::size_t r = x.rows(), c = x.cols();
  const auto in = x.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = in.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += (out[i * c + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  return MakeResult(x.shape(), std::move(out), "softmax_rows", {x}, [r, c](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.value.data() + i * c;
      const double* dy = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += dy[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += y[j] * (dy[j] - dot);
    }
  });
}

Tensor LogSoftmaxRows(const Tensor& x) {
  const std::size_t r = x.rows(), c = x.cols();
  const auto in = x.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = in.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = row[j] - lse;
  }
  return MakeResult(x.shape(), std::move(out), "log_softmax_rows", {x}, [r, c](Node& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.value.data() + i * c;
      const double* dy = self.grad.data() + i * c;
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) total += dy[j];
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += dy[j] - std::exp(y[j]) * total;
    }
  });
}

Tensor LayerNormRows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t r = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw ShapeError("LayerNormRows: gamma " + ShapeString(gamma.shape()) + ", beta " +
                     ShapeString(beta.shape()) + " vs input " + ShapeString(x.shape()));
  }
  const auto in = x.values();
  std::vector<double> normalized(r * d);
  std::vector<double> inv_std(r);
  std::vector<double> out(r * d);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = in.data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double xhat = (row[j] - mean) * inv_std[i];
      normalized[i * d + j] = xhat;
      out[i * d + j] = xhat * gamma[j] + beta[j];
    }
  }
  return MakeResult(
      x.shape(), std::move(out), "layernorm_rows", {x, gamma, beta},
      [r, d, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
        const auto& g = self.parents[1]->value;
        auto* dx = ParentGrad(self, 0);
        auto* dgamma = ParentGrad(self, 1);
        auto* dbeta = ParentGrad(self, 2);
        std::vector<double> dxhat(d);
        for (std::size_t i = 0; i < r; ++i) {
          const double* dy = self.grad.data() + i * d;
          const double* xhat = normalized.data() + i * d;
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            if (dgamma) (*dgamma)[j] += dy[j] * xhat[j];
            if (dbeta) (*dbeta)[j] += dy[j];
            dxhat[j] = dy[j] * g[j];
            mean_dxhat += dxhat[j];
            mean_dxhat_xhat += dxhat[j] * xhat[j];
          }
          if (!dx) continue;
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          for (std::size_t j = 0; j < d; ++j) {
            (*dx)[i * d + j] += inv_std[i] * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
          }
        }
      });
}

Tensor MaskedMeanRows(const Tensor& x, const std::vector<bool>& mask) {
  const std::size_t r = x.rows(), c = x.cols();
  if (mask.size() != r) {
    throw ShapeError("MaskedMeanRows: mask of length " + std::to_string(mask.size()) +
                     " for input " + ShapeString(x.shape()));
  }
  const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (count == 0) throw InvalidArgument("MaskedMeanRows: every row is masked out");
  std::vector<bool> keep = mask;
  const double inv = 1.0 / static_cast<double>(count);
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    if (!keep[i]) continue;
    for (std::size_t j = 0; j < c; ++j) out[j] += x.at(i, j);
  }
  for (auto& v : out) v *= inv;
  return MakeResult({c}, std::move(out), "masked_mean_rows", {x},
                    [r, c, inv, keep = std::move(keep)](Node& self) {
                      auto* g = ParentGrad(self, 0);
                      if (!g) return;
                      for (std::size_t i = 0; i < r; ++i) {
                        if (!keep[i]) continue;
                        for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += self.grad[j] * inv;
                      }
                    });
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return MakeResult({}, {total}, "sum", {a}, [](Node& self) {
    if (auto* g = ParentGrad(self, 0))
      for (auto& v : *g) v += self.grad[0];
  });
}

Tensor Mean(const Tensor& a) { return Scale(Sum(a), 1.0 / static_cast<double>(a.size())); }

}  // namespace cellformer::ad
