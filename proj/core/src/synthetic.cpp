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

#include "tokenshot/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tokenshot/errors.hpp"

namespace tokenshot {
namespace {

std::vector<double> UnitNormal(int dim, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double ss = 0.0;
  for (double& x : v) {
    x = rng.Normal();
    ss += x * x;
  }
  const double norm = std::sqrt(ss);
  for (double& x : v) x /= norm;
  return v;
}

std::string GridId(const std::string& cls, int index) {
  return cls + "/" + std::to_string(index);
}

}  // namespace

TokenDataset OrthogonalDataset(int num_classes, int grids_per_class, GridShape grid,
                               int dim, double noise, std::uint64_t seed) {
  if (dim < num_classes) {
    throw InvalidArgumentError("orthogonal dataset needs dim >= num_classes");
  }
  Rng rng(seed);
  std::vector<TokenClass> classes;
  for (int c = 0; c < num_classes; ++c) {
    TokenClass cls{"class" + std::to_string(c), {}};
    for (int i = 0; i < grids_per_class; ++i) {
      MatrixF tokens(static_cast<std::size_t>(grid.size()), static_cast<std::size_t>(dim));
      for (std::size_t l = 0; l < tokens.rows(); ++l) {
        auto row = tokens.row(l);
        for (int d = 0; d < dim; ++d) {
          const double base = d == c ? 1.0 : 0.0;
          row[static_cast<std::size_t>(d)] =
              static_cast<float>(base + rng.Uniform(-noise, noise));
        }
      }
      cls.grids.emplace_back(std::move(tokens), grid, GridId(cls.name, i));
    }
    classes.push_back(std::move(cls));
  }
  return TokenDataset(std::move(classes));
}

TokenDataset RandomTokenDataset(int num_classes, int grids_per_class, GridShape grid,
                                int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenClass> classes;
  for (int c = 0; c < num_classes; ++c) {
    TokenClass cls{"class" + std::to_string(c), {}};
    for (int i = 0; i < grids_per_class; ++i) {
      MatrixF tokens(static_cast<std::size_t>(grid.size()), static_cast<std::size_t>(dim));
      for (float& x : tokens.data()) x = static_cast<float>(rng.Normal());
      cls.grids.emplace_back(std::move(tokens), grid, GridId(cls.name, i));
    }
    classes.push_back(std::move(cls));
  }
  return TokenDataset(std::move(classes));
}

DistractorDataset MakeDistractorDataset(const DistractorSpec& spec) {
  const int L = spec.grid.size();
  if (spec.min_distractors < 0 || spec.max_distractors < spec.min_distractors ||
      spec.max_distractors > L || spec.num_distractor_clusters < 1) {
    throw InvalidArgumentError("invalid distractor spec");
  }
  Rng rng(spec.seed);
  std::vector<std::vector<double>> class_centres;
  for (int c = 0; c < spec.num_classes; ++c) {
    class_centres.push_back(UnitNormal(spec.dim, rng));
  }
  std::vector<std::vector<double>> distractor_centres;
  for (int i = 0; i < spec.num_distractor_clusters; ++i) {
    distractor_centres.push_back(UnitNormal(spec.dim, rng));
  }

  std::vector<TokenClass> classes;
  std::vector<std::vector<std::vector<bool>>> flags;
  std::vector<int> positions(static_cast<std::size_t>(L));
  for (int c = 0; c < spec.num_classes; ++c) {
    TokenClass cls{"class" + std::to_string(c), {}};
    std::vector<std::vector<bool>> class_flags;
    for (int i = 0; i < spec.grids_per_class; ++i) {
      const auto& clutter = distractor_centres[rng.UniformIndex(
          static_cast<std::uint64_t>(spec.num_distractor_clusters))];
      const int count =
          spec.min_distractors +
          static_cast<int>(rng.UniformIndex(
              static_cast<std::uint64_t>(spec.max_distractors - spec.min_distractors + 1)));
      std::iota(positions.begin(), positions.end(), 0);
      Shuffle(std::span<int>(positions), rng);
      std::vector<bool> is_distractor(static_cast<std::size_t>(L), false);
      for (int t = 0; t < count; ++t) {
        is_distractor[static_cast<std::size_t>(positions[static_cast<std::size_t>(t)])] = true;
      }

      MatrixF tokens(static_cast<std::size_t>(L), static_cast<std::size_t>(spec.dim));
      for (int l = 0; l < L; ++l) {
        const bool d = is_distractor[static_cast<std::size_t>(l)];
        const auto& centre = d ? clutter : class_centres[static_cast<std::size_t>(c)];
        const double sigma = d ? spec.distractor_noise : spec.class_noise;
        auto row = tokens.row(static_cast<std::size_t>(l));
        for (int k = 0; k < spec.dim; ++k) {
          row[static_cast<std::size_t>(k)] = static_cast<float>(
              centre[static_cast<std::size_t>(k)] + sigma * rng.Normal());
        }
      }
      cls.grids.emplace_back(std::move(tokens), spec.grid, GridId(cls.name, i));
      class_flags.push_back(std::move(is_distractor));
    }
    classes.push_back(std::move(cls));
    flags.push_back(std::move(class_flags));
  }
  return {TokenDataset(std::move(classes)), std::move(flags)};
}

DistractorSpec DistractorBenchmarkSpec() { return DistractorSpec{}; }

}  // namespace tokenshot
