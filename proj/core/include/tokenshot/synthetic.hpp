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

// Seeded synthetic token datasets for tests, benchmarks and sanity checks.

#ifndef TOKENSHOT_SYNTHETIC_HPP_
#define TOKENSHOT_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/rng.hpp"

namespace tokenshot {

/// Class c's tokens are the basis vector e_c plus uniform noise in
/// [-noise, noise) per coordinate. Requires dim >= num_classes.
TokenDataset OrthogonalDataset(int num_classes, int grids_per_class, GridShape grid,
                               int dim, double noise, std::uint64_t seed);

/// Every token entry i.i.d. standard normal, so labels carry no signal.
TokenDataset RandomTokenDataset(int num_classes, int grids_per_class, GridShape grid,
                                int dim, std::uint64_t seed);

/// Images whose tokens mix a class-specific Gaussian cluster with clutter
/// drawn from a few distractor clusters shared by every class. Each image
/// picks one distractor cluster and a random number of distractor tokens in
/// [min_distractors, max_distractors] at random grid positions; the rest are
/// class tokens. Class-token evidence is diluted by the clutter, so down-
/// weighting distractor tokens helps.
struct DistractorSpec {
  int num_classes = 10;
  int grids_per_class = 40;
  GridShape grid{4, 4};
  int dim = 32;
  int num_distractor_clusters = 2;
  int min_distractors = 6;
  int max_distractors = 12;
  /// Per-coordinate standard deviation around unit-norm cluster centres.
  double class_noise = 0.10;
  double distractor_noise = 0.1;
  std::uint64_t seed = 0;
};

/// The dataset plus, per class and grid, which tokens are distractors.
struct DistractorDataset {
  TokenDataset dataset;
  std::vector<std::vector<std::vector<bool>>> is_distractor;  // [class][grid][token]
};

DistractorDataset MakeDistractorDataset(const DistractorSpec& spec);

/// The fixture used by the inner-loop benefit checks.
DistractorSpec DistractorBenchmarkSpec();

}  // namespace tokenshot

#endif  // TOKENSHOT_SYNTHETIC_HPP_
