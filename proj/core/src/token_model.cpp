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

#include "tokenshot/token_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tokenshot/errors.hpp"

namespace tokenshot {

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgumentError("matrix data has " +
                               std::to_string(data_.size()) + " entries, expected " +
                               std::to_string(rows_ * cols_));
  }
}

template class Matrix<float>;
template class Matrix<double>;

TokenGrid::TokenGrid(MatrixF tokens, GridShape grid, std::string image_id)
    : tokens_(std::move(tokens)), grid_(grid), image_id_(std::move(image_id)) {
  if (tokens_.rows() < 1 || tokens_.cols() < 1) {
    throw InvalidArgumentError("token grid needs L >= 1 and D >= 1");
  }
  if (grid_.height < 1 || grid_.width < 1 ||
      static_cast<std::size_t>(grid_.size()) != tokens_.rows()) {
    throw InvalidArgumentError(
        "grid " + std::to_string(grid_.height) + "x" +
        std::to_string(grid_.width) + " does not match L = " +
        std::to_string(tokens_.rows()));
  }
  for (float x : tokens_.data()) {
    if (!std::isfinite(x)) {
      throw InvalidArgumentError("token grid '" + image_id_ +
                                 "' contains a non-finite entry");
    }
  }
}

Episode::Episode(int n_way, int k_shot, std::vector<LabeledGrid> support,
                 std::vector<LabeledGrid> queries)
    : n_way_(n_way), k_shot_(k_shot), queries_(std::move(queries)) {
  if (n_way_ < 2) throw InvalidArgumentError("episode needs N >= 2");
  if (k_shot_ < 1) throw InvalidArgumentError("episode needs K >= 1");
  if (support.empty()) throw InvalidArgumentError("episode has no support");

  grid_ = support.front().grid.grid();
  dim_ = support.front().grid.dim();

  std::vector<int> shots(static_cast<std::size_t>(n_way_), 0);
  for (const auto& s : support) {
    if (s.label < 0 || s.label >= n_way_) {
      throw InvalidArgumentError("support label " + std::to_string(s.label) +
                                 " outside [0, " + std::to_string(n_way_) + ")");
    }
    ++shots[static_cast<std::size_t>(s.label)];
  }
  for (int n = 0; n < n_way_; ++n) {
    if (shots[static_cast<std::size_t>(n)] != k_shot_) {
      throw InvalidArgumentError(
          "class " + std::to_string(n) + " has " +
          std::to_string(shots[static_cast<std::size_t>(n)]) +
          " support shots, expected " + std::to_string(k_shot_));
    }
  }
  for (const auto& q : queries_) {
    if (q.label < 0 || q.label >= n_way_) {
      throw InvalidArgumentError("query label " + std::to_string(q.label) +
                                 " outside [0, " + std::to_string(n_way_) + ")");
    }
  }
  auto check_shape = [&](const TokenGrid& g) {
    if (g.grid() != grid_ || g.dim() != dim_) {
      throw InvalidArgumentError(
          "grid '" + g.image_id() + "' has shape " +
          std::to_string(g.grid().height) + "x" + std::to_string(g.grid().width) +
          "x" + std::to_string(g.dim()) + ", episode expects " +
          std::to_string(grid_.height) + "x" + std::to_string(grid_.width) +
          "x" + std::to_string(dim_));
    }
  };
  for (const auto& s : support) check_shape(s.grid);
  for (const auto& q : queries_) check_shape(q.grid);

  std::stable_sort(support.begin(), support.end(),
                   [](const LabeledGrid& a, const LabeledGrid& b) {
                     return a.label < b.label;
                   });
  support_ = std::move(support);
}

double ClassifierConfig::ResolvedTau(int dim) const {
  if (tau) return *tau;
  return 1.0 / std::sqrt(static_cast<double>(dim));
}

void ClassifierConfig::Validate() const {
  if (tau && !(*tau > 0.0 && std::isfinite(*tau))) {
    throw InvalidArgumentError("tau must be a positive finite number");
  }
  if (!(lr > 0.0 && std::isfinite(lr))) {
    throw InvalidArgumentError("learning rate must be a positive finite number");
  }
  if (steps < 0) throw InvalidArgumentError("steps must be non-negative");
  if (mask_window < 1 || mask_window % 2 == 0) {
    throw InvalidArgumentError("mask window must be odd and >= 1, got " +
                               std::to_string(mask_window));
  }
}

SupportLayout FlattenSupport(const Episode& episode) {
  const int L = episode.tokens_per_image();
  const int D = episode.dim();
  const int images = episode.n_way() * episode.k_shot();

  SupportLayout layout;
  layout.tokens = MatrixF(static_cast<std::size_t>(images * L),
                          static_cast<std::size_t>(D));
  layout.token_class.resize(static_cast<std::size_t>(images * L));
  layout.token_image.resize(static_cast<std::size_t>(images * L));
  layout.tokens_per_image = L;
  layout.k_shot = episode.k_shot();

  for (int image = 0; image < images; ++image) {
    const auto& entry = episode.support()[static_cast<std::size_t>(image)];
    for (int l = 0; l < L; ++l) {
      const auto row = static_cast<std::size_t>(image * L + l);
      std::ranges::copy(entry.grid.tokens().row(static_cast<std::size_t>(l)),
                        layout.tokens.row(row).begin());
      layout.token_class[row] = entry.label;
      layout.token_image[row] = image;
    }
  }
  return layout;
}

MatrixF FlattenQueries(const Episode& episode) {
  const int L = episode.tokens_per_image();
  MatrixF out(static_cast<std::size_t>(episode.num_queries() * L),
              static_cast<std::size_t>(episode.dim()));
  for (int q = 0; q < episode.num_queries(); ++q) {
    const auto& grid = episode.queries()[static_cast<std::size_t>(q)].grid;
    for (int l = 0; l < L; ++l) {
      std::ranges::copy(grid.tokens().row(static_cast<std::size_t>(l)),
                        out.row(static_cast<std::size_t>(q * L + l)).begin());
    }
  }
  return out;
}

int SupportRow(const SupportIndex& index, int k_shot, int tokens_per_image) {
  return (index.class_index * k_shot + index.shot) * tokens_per_image +
         index.patch;
}

SupportIndex DecodeSupportRow(int row, int k_shot, int tokens_per_image) {
  const int image = row / tokens_per_image;
  return {image / k_shot, image % k_shot, row % tokens_per_image};
}

}  // namespace tokenshot
