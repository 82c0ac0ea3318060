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

// Episodic N-way K-shot evaluation with 95% confidence intervals.

#ifndef TOKENSHOT_EPISODIC_EVAL_HPP_
#define TOKENSHOT_EPISODIC_EVAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tokenshot/rng.hpp"
#include "tokenshot/token_model.hpp"

namespace tokenshot {

struct TokenClass {
  std::string name;
  std::vector<TokenGrid> grids;
};

/// Class-partitioned token grids sharing one (L, D, grid) shape. Keeping
/// train and test classes apart is up to whoever builds the dataset.
class TokenDataset {
 public:
  /// Throws DataError if empty, if a class has no grids, or if shapes differ.
  explicit TokenDataset(std::vector<TokenClass> classes);

  const std::vector<TokenClass>& classes() const { return classes_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  const GridShape& grid() const { return grid_; }
  int dim() const { return dim_; }

 private:
  std::vector<TokenClass> classes_;
  GridShape grid_;
  int dim_ = 0;
};

struct EvalConfig {
  int n_way = 5;
  int k_shot = 5;
  /// Not fixed by the original protocol; 15 is the usual convention.
  int n_query_per_class = 15;
  int episodes = 600;
  std::uint64_t seed = 0;
  ClassifierConfig classifier;
  /// When non-empty, one report per entry over identical episodes;
  /// classifier.steps is then ignored.
  std::vector<int> steps_sweep;
  /// Worker threads. Results do not depend on this.
  int jobs = 1;

  /// Throws InvalidArgumentError for out-of-range values.
  void Validate() const;
};

struct EvalReport {
  EvalConfig config;  // echo; config.classifier.steps is this report's count
  std::vector<double> per_episode_accuracy;
  double mean = 0.0;
  double ci95 = 0.0;
  double wall_ms_per_episode = 0.0;
};

struct MeanAndCi {
  double mean;
  double ci95;
};

/// Mean and 1.96 * s / sqrt(n) with the n-1 sample standard deviation;
/// ci95 is 0 for n = 1.
MeanAndCi MeanWithCi95(std::span<const double> values);

/// Samples N distinct classes uniformly, then K support and n_query query
/// grids per class without replacement. Class indices follow the sampled
/// order. Throws DataError if a class has fewer than K + n_query grids or
/// the dataset has fewer than N classes.
Episode SampleEpisode(const TokenDataset& dataset, const EvalConfig& config,
                      Rng& rng);

/// Episode `index` of a run: uses the stream Rng::ForStream(seed, index).
Episode SampleEpisode(const TokenDataset& dataset, const EvalConfig& config,
                      int index);

/// Runs config.episodes episodes at config.classifier.steps inner-loop steps.
/// Errors abort the run and are rethrown with the lowest failing episode
/// index prepended to the message.
EvalReport Evaluate(const TokenDataset& dataset, const EvalConfig& config);

/// One report per entry of config.steps_sweep (or the single
/// config.classifier.steps when the sweep is empty), all computed on the
/// same episodes.
std::vector<EvalReport> EvaluateSweep(const TokenDataset& dataset,
                                      const EvalConfig& config);

}  // namespace tokenshot

#endif  // TOKENSHOT_EPISODIC_EVAL_HPP_
