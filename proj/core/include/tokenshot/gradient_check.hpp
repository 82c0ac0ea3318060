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

// Finite-difference verification of the support-loss gradient.

#ifndef TOKENSHOT_GRADIENT_CHECK_HPP_
#define TOKENSHOT_GRADIENT_CHECK_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tokenshot/importance.hpp"
#include "tokenshot/rng.hpp"

namespace tokenshot {

inline constexpr double kDefaultFiniteDifferenceStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-5;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
std::vector<double> CentralDifferences(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = kDefaultFiniteDifferenceStep);

/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|).
double MaxRelativeError(std::span<const double> a, std::span<const double> b);

/// Analytic gradient provider; the default is SupportObjective::Gradient.
/// Replaceable so that a deliberately broken gradient can be checked.
using GradientFn = std::function<std::vector<double>(const SupportObjective&,
                                                     std::span<const double>)>;

GradientFn AnalyticGradient();

/// A random support-set problem: episode, mask, temperature and a point v.
struct GradCheckProblem {
  Episode episode;
  Mask mask;
  double tau;
  std::vector<double> v;
};

/// Draws N in {2,5}, K in {1,2}, L in {4 (2x2), 9 (3x3)}, D in {3,8}; tokens
/// and v are standard normal; tau = 1/sqrt(D). K = 1 uses the widest odd
/// window that leaves unmasked same-image pairs for every token (m = 1 on
/// 2x2 grids, m = 3 on 3x3 grids).
GradCheckProblem RandomGradCheckProblem(Rng& rng);

struct GradCheckReport {
  std::vector<double> trial_errors;
  double max_error = 0.0;
  bool passed = false;
};

/// Runs `trials` random problems drawn from Rng(seed) and compares the
/// analytic gradient with central differences of the loss.
GradCheckReport RunGradCheck(std::uint64_t seed, int trials,
                             const GradientFn& gradient = AnalyticGradient(),
                             double h = kDefaultFiniteDifferenceStep,
                             double tolerance = kGradientTolerance);

}  // namespace tokenshot

#endif  // TOKENSHOT_GRADIENT_CHECK_HPP_
