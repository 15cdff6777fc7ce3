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
#include "cellformer/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cellformer/error.hpp"

namespace cellformer::ad {

GradCheckReport GradCheck(const std::function<Tensor()>& loss, std::span<Tensor> inputs,
                          const GradCheckOptions& options) {
  for (auto& x : inputs) {
    if (!x.requires_grad()) throw InvalidArgument("GradCheck: input does not require grad");
    x.zero_grad();
  }
  loss().backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& x : inputs) {
    const auto g = x.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(x.size(), 0.0);
    x.zero_grad();
  }

  GradCheckReport report;
  NoGradGuard no_grad;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    auto values = inputs[t].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.eps;
      const double plus = loss().item();
      values[i] = saved - options.eps;
      const double minus = loss().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double err = std::abs(a - numeric) / denom;
      ++report.checked;
      if (err > report.max_rel_err || report.worst.empty()) {
        report.max_rel_err = err;
        report.worst = std::to_string(t) + "#" + std::to_string(i);
      }
    }
  }
  return report;
}

double GradCheck(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
  Tensor inputs[] = {x};
  GradCheckOptions options;
  options.eps = eps;
  return GradCheck([&] { return f(x); }, inputs, options).max_rel_err;
}

}  // namespace cellformer::ad
