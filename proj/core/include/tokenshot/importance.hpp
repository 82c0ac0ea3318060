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

// Inference-time learning of per-token importance weights.
//
// The support set is classified against itself: each support image acts as
// an unlabeled pseudo-query and is scored with the same LogSumExp classifier
// used for real queries, over the support-vs-support similarity matrix with
// the importance weights added row-wise. Pairs that would let a token match
// itself are masked out:
//   - K > 1: every same-image L x L block (block-diagonal mask);
//   - K = 1: within an image, the m x m window of support tokens centred on
//     the pseudo-query token.
// The summed cross-entropy over all N*K pseudo-queries is minimised by plain
// gradient descent from v = 0. The gradient is analytic; see
// docs/gradient.md for the derivation.

#ifndef TOKENSHOT_IMPORTANCE_HPP_
#define TOKENSHOT_IMPORTANCE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tokenshot/similarity.hpp"
#include "tokenshot/token_model.hpp"

namespace tokenshot {

/// Excluded (support row, pseudo-query column) pairs of the
/// (N*K*L) x (N*K*L) support self-similarity matrix.
class Mask {
 public:
  enum class Mode { kBlockDiagonal, kLocalWindow };

  /// An empty mask of the given size (testing and custom masks).
  Mask(Mode mode, int size, int window = 0);

  Mode mode() const { return mode_; }
  int size() const { return size_; }
  /// Window edge m for kLocalWindow, 0 otherwise.
  int window() const { return window_; }

  bool IsMasked(int row, int col) const {
    return masked_[static_cast<std::size_t>(row) * static_cast<std::size_t>(size_) +
                   static_cast<std::size_t>(col)] != 0;
  }
  void Set(int row, int col) {
    masked_[static_cast<std::size_t>(row) * static_cast<std::size_t>(size_) +
            static_cast<std::size_t>(col)] = 1;
  }
  std::int64_t Count() const;

 private:
  Mode mode_;
  int size_;
  int window_;
  std::vector<std::uint8_t> masked_;
};

/// Block-diagonal for K > 1, local m x m window for K = 1.
/// Throws InvalidArgumentError if grid_h * grid_w != L or m is even or < 1.
Mask BuildMask(int n_way, int k_shot, int tokens_per_image, GridShape grid,
               int window);

/// Number of same-image rows masked for a pseudo-query token at (row, col)
/// under an m x m window clipped to the grid.
int ClippedWindowCount(GridShape grid, int row, int col, int window);

/// Support self-classification objective for one episode. The masked
/// similarity matrix is built once; only v varies between evaluations.
class SupportObjective {
 public:
  /// Throws InvalidArgumentError if the mask size is not N*K*L.
  SupportObjective(const Episode& episode, const Mask& mask, double tau);

  int num_weights() const { return static_cast<int>(similarity_.values.rows()); }
  int num_pseudo_queries() const { return static_cast<int>(labels_.size()); }
  int num_classes() const { return similarity_.num_classes; }
  double tau() const { return tau_; }
  /// Masked, un-reweighted support-vs-support similarities.
  const SimilarityTensor& similarity() const { return similarity_; }

  /// (N*K) x N logits; row p = pseudo-query image p in class-major order.
  MatrixD SelfLogits(std::span<const double> v) const;

  /// Sum of cross-entropies over pseudo-queries; +inf when some pseudo-query
  /// has no unmasked pair in its own class.
  double Loss(std::span<const double> v) const;

  /// Exact gradient of Loss with respect to v. Throws NumericalError when
  /// the loss is not finite.
  std::vector<double> Gradient(std::span<const double> v) const;

  struct Evaluation {
    double loss;
    std::vector<double> gradient;
  };
  /// Loss and gradient from a single pass. If the loss is not finite the
  /// gradient is left empty.
  Evaluation Evaluate(std::span<const double> v) const;

 private:
  SimilarityTensor similarity_;
  // log sum_{c in p} exp(S_jc / tau) for row j and pseudo-query p; v_j is
  // constant across a pseudo-query's columns, so each step only needs this.
  MatrixD log_column_mass_;
  std::vector<int> labels_;
  double tau_;
};

MatrixD SupportSelfLogits(const Episode& episode, std::span<const double> v,
                          const Mask& mask, double tau);
double SupportLoss(const Episode& episode, std::span<const double> v,
                   const Mask& mask, double tau);
std::vector<double> SupportLossGradient(const Episode& episode,
                                        std::span<const double> v,
                                        const Mask& mask, double tau);

struct InnerLoopTrace {
  /// Support loss at v_0 = 0 and after every step; size steps_taken + 1.
  std::vector<double> losses;
  std::vector<double> v_final;
  int steps_taken = 0;
};

/// Runs config.steps steps of v <- v - lr * grad from v = 0. Throws
/// NumericalError naming the step if the loss becomes non-finite.
InnerLoopTrace OptimizeImportance(const Episode& episode,
                                  const ClassifierConfig& config);

/// Weights after each requested step count (ascending, duplicates allowed)
/// from one descent run; entry i equals OptimizeImportance with
/// steps = step_counts[i] bit for bit.
std::vector<std::vector<double>> ImportanceSnapshots(
    const Episode& episode, const ClassifierConfig& config,
    std::span<const int> step_counts);

}  // namespace tokenshot

#endif  // TOKENSHOT_IMPORTANCE_HPP_
