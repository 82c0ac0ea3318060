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

// Data model for few-shot episodes over patch-token embeddings.

#ifndef TOKENSHOT_TOKEN_MODEL_HPP_
#define TOKENSHOT_TOKEN_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tokenshot {

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

/// Spatial layout of the patch tokens of one image. Tokens are stored in
/// row-major grid order: token index = row * width + col.
struct GridShape {
  int height = 0;
  int width = 0;

  int size() const { return height * width; }
  int RowOf(int token) const { return token / width; }
  int ColOf(int token) const { return token % width; }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// The L x D patch tokens of a single image. Immutable once built.
class TokenGrid {
 public:
  /// Throws InvalidArgumentError unless L >= 1, D >= 1, grid.size() == L and
  /// every entry is finite.
  TokenGrid(MatrixF tokens, GridShape grid, std::string image_id = {});

  const MatrixF& tokens() const { return tokens_; }
  const GridShape& grid() const { return grid_; }
  const std::string& image_id() const { return image_id_; }
  int num_tokens() const { return static_cast<int>(tokens_.rows()); }
  int dim() const { return static_cast<int>(tokens_.cols()); }

 private:
  MatrixF tokens_;
  GridShape grid_;
  std::string image_id_;
};

struct LabeledGrid {
  TokenGrid grid;
  int label;
};

/// An N-way K-shot task: N*K labelled support grids plus Q labelled queries.
class Episode {
 public:
  /// Validates the episode and stores the support set class-major (class 0
  /// shots first), keeping the given order among shots of one class.
  /// Throws InvalidArgumentError for N < 2, K < 1, a class without exactly K
  /// shots, an out-of-range label, or grids with differing L, D or shape.
  Episode(int n_way, int k_shot, std::vector<LabeledGrid> support,
          std::vector<LabeledGrid> queries);

  int n_way() const { return n_way_; }
  int k_shot() const { return k_shot_; }
  int num_queries() const { return static_cast<int>(queries_.size()); }
  int tokens_per_image() const { return grid_.size(); }
  int dim() const { return dim_; }
  const GridShape& grid() const { return grid_; }

  /// Support grids in class-major order; entry n*K + k is shot k of class n.
  const std::vector<LabeledGrid>& support() const { return support_; }
  const std::vector<LabeledGrid>& queries() const { return queries_; }
  const TokenGrid& support_grid(int n, int k) const {
    return support_[static_cast<std::size_t>(n * k_shot_ + k)].grid;
  }

  /// Number of support tokens N*K*L.
  int num_support_tokens() const { return n_way_ * k_shot_ * grid_.size(); }

 private:
  int n_way_;
  int k_shot_;
  int dim_ = 0;
  GridShape grid_;
  std::vector<LabeledGrid> support_;
  std::vector<LabeledGrid> queries_;
};

enum class SimilarityMetric { kCosine };

/// Hyperparameters of the token-similarity classifier and its inner loop.
struct ClassifierConfig {
  /// Softmax temperature. Unset means 1/sqrt(D) for token dimension D.
  std::optional<double> tau;
  double lr = 0.1;
  int steps = 15;
  int mask_window = 5;
  SimilarityMetric similarity = SimilarityMetric::kCosine;

  double ResolvedTau(int dim) const;

  /// Throws InvalidArgumentError on tau <= 0, lr <= 0, steps < 0, or an even
  /// or non-positive mask window.
  void Validate() const;
};

/// Support tokens stacked in the canonical class-major order
/// (class, then shot, then patch): row j belongs to class j / (K*L), support
/// image j / L, and patch j % L.
struct SupportLayout {
  MatrixF tokens;
  std::vector<int> token_class;
  std::vector<int> token_image;
  int tokens_per_image = 0;
  int k_shot = 0;
};

struct SupportIndex {
  int class_index;
  int shot;
  int patch;

  friend bool operator==(const SupportIndex&, const SupportIndex&) = default;
};

SupportLayout FlattenSupport(const Episode& episode);

/// Query tokens stacked query-major then patch; (Q*L) x D.
MatrixF FlattenQueries(const Episode& episode);

int SupportRow(const SupportIndex& index, int k_shot, int tokens_per_image);
SupportIndex DecodeSupportRow(int row, int k_shot, int tokens_per_image);

}  // namespace tokenshot

#endif  // TOKENSHOT_TOKEN_MODEL_HPP_
