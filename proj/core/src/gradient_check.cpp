// Copyright 2026 The tokenshot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tokenshot/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tokenshot/errors.hpp"

namespace tokenshot {

std::vector<double> CentralDifferences(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double up = f(point);
    point[i] = saved - h;
    const double down = f(point);
    point[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double MaxRelativeError(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgumentError("gradient length mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    const double err = std::abs(a[i] - b[i]) / scale;
    if (!(err <= worst)) worst = err;  // NaN propagates
  }
  return worst;
}

GradientFn AnalyticGradient() {
  return [](const SupportObjective& objective, std::span<const double> v) {
    return objective.Gradient(v);
  };
}

GradCheckProblem RandomGradCheckProblem(Rng& rng) {
  const int n_way = rng.UniformIndex(2) == 0 ? 2 : 5;
  const int k_shot = rng.UniformIndex(2) == 0 ? 1 : 2;
  const int side = rng.UniformIndex(2) == 0 ? 2 : 3;
  const int dim = rng.UniformIndex(2) == 0 ? 3 : 8;
  const GridShape grid{side, side};

  std::vector<LabeledGrid> support;
  for (int n = 0; n < n_way; ++n) {
    for (int k = 0; k < k_shot; ++k) {
      MatrixF tokens(static_cast<std::size_t>(grid.size()), static_cast<std::size_t>(dim));
      for (float& x : tokens.data()) x = static_cast<float>(rng.Normal());
      support.push_back({TokenGrid(std::move(tokens), grid,
                                   "s" + std::to_string(n) + "_" + std::to_string(k)),
                         n});
    }
  }
  Episode episode(n_way, k_shot, std::move(support), {});
  // Ignored for K > 1.
  const int window = side == 2 ? 1 : 3;
  Mask mask = BuildMask(n_way, k_shot, grid.size(), grid, window);
  std::vector<double> v(static_cast<std::size_t>(episode.num_support_tokens()));
  for (double& x : v) x = rng.Normal();
  const double tau = 1.0 / std::sqrt(static_cast<double>(dim));
  return {std::move(episode), std::move(mask), tau, std::move(v)};
}

GradCheckReport RunGradCheck(std::uint64_t seed, int trials,
                             const GradientFn& gradient, double h,
                             double tolerance) {
  if (trials < 1) throw InvalidArgumentError("gradcheck needs at least one trial");
  Rng rng(seed);
  GradCheckReport report;
  for (int t = 0; t < trials; ++t) {
    const GradCheckProblem problem = RandomGradCheckProblem(rng);
    const SupportObjective objective(problem.episode, problem.mask, problem.tau);
    const auto analytic = gradient(objective, problem.v);
    const auto numeric = CentralDifferences(
        [&](std::span<const double> v) { return objective.Loss(v); }, problem.v, h);
    const double err = MaxRelativeError(analytic, numeric);
    report.trial_errors.push_back(err);
    if (!(err <= report.max_error)) report.max_error = err;
  }
  report.passed = report.max_error < tolerance;
  return report;
}

}  // namespace tokenshot
