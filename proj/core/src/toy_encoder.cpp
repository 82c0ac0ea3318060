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

#include "tokenshot/toy_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tokenshot/errors.hpp"
#include "tokenshot/rng.hpp"

namespace tokenshot {

RawImage RawImage::FromPnm(const PnmImage& image) {
  RawImage raw;
  raw.height = image.height;
  raw.width = image.width;
  raw.channels = image.channels;
  raw.pixels.reserve(image.pixels.size());
  for (std::uint8_t b : image.pixels) {
    raw.pixels.push_back(static_cast<float>(b) / 255.0f);
  }
  return raw;
}

PatchProjector::PatchProjector(int patch_size, int channels, int out_dim,
                               std::uint64_t seed)
    : patch_size_(patch_size), channels_(channels) {
  if (patch_size < 1 || out_dim < 1 || (channels != 1 && channels != 3)) {
    throw InvalidArgumentError(
        "projector needs patch size >= 1, out dim >= 1 and 1 or 3 channels");
  }
  const int in_dim = patch_size * patch_size * channels;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  projection_ = MatrixD(static_cast<std::size_t>(in_dim),
                        static_cast<std::size_t>(out_dim));
  Rng rng(seed);
  for (double& x : projection_.data()) x = rng.Uniform(-bound, bound);
}

PatchProjector::PatchProjector(int patch_size, int channels, MatrixD projection)
    : patch_size_(patch_size), channels_(channels), projection_(std::move(projection)) {
  if (patch_size < 1 || (channels != 1 && channels != 3)) {
    throw InvalidArgumentError("projector needs patch size >= 1 and 1 or 3 channels");
  }
  if (projection_.rows() !=
          static_cast<std::size_t>(patch_size * patch_size * channels) ||
      projection_.cols() < 1) {
    throw InvalidArgumentError("projection must have P*P*C rows and >= 1 column");
  }
}

std::vector<std::vector<float>> ExtractPatches(const RawImage& image,
                                               int patch_size) {
  if (patch_size < 1) throw InvalidArgumentError("patch size must be >= 1");
  if (image.height % patch_size != 0 || image.width % patch_size != 0) {
    throw InvalidArgumentError(
        "image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
        " (H x W) is not divisible by patch size P = " + std::to_string(patch_size));
  }
  const std::size_t expected = static_cast<std::size_t>(image.height) *
                               static_cast<std::size_t>(image.width) *
                               static_cast<std::size_t>(image.channels);
  if (image.pixels.size() != expected) {
    throw InvalidArgumentError("image pixel buffer does not match H*W*C");
  }
  const int rows = image.height / patch_size;
  const int cols = image.width / patch_size;
  const int C = image.channels;

  std::vector<std::vector<float>> patches;
  patches.reserve(static_cast<std::size_t>(rows * cols));
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      std::vector<float> patch;
      patch.reserve(static_cast<std::size_t>(patch_size * patch_size * C));
      for (int y = 0; y < patch_size; ++y) {
        const int iy = pr * patch_size + y;
        for (int x = 0; x < patch_size; ++x) {
          const int ix = pc * patch_size + x;
          const auto base = static_cast<std::size_t>((iy * image.width + ix) * C);
          for (int c = 0; c < C; ++c) patch.push_back(image.pixels[base + static_cast<std::size_t>(c)]);
        }
      }
      patches.push_back(std::move(patch));
    }
  }
  return patches;
}

TokenGrid Encode(const RawImage& image, const PatchProjector& projector,
                 std::string image_id) {
  if (image.channels != projector.channels()) {
    throw InvalidArgumentError("image has " + std::to_string(image.channels) +
                               " channels, projector expects " +
                               std::to_string(projector.channels()));
  }
  const auto patches = ExtractPatches(image, projector.patch_size());
  const MatrixD& proj = projector.projection();
  const std::size_t D = proj.cols();

  MatrixF tokens(patches.size(), D);
  std::vector<double> acc(D);
  for (std::size_t p = 0; p < patches.size(); ++p) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < patches[p].size(); ++i) {
      const double x = patches[p][i];
      const auto w = proj.row(i);
      for (std::size_t d = 0; d < D; ++d) acc[d] += x * w[d];
    }
    for (std::size_t d = 0; d < D; ++d) tokens(p, d) = static_cast<float>(acc[d]);
  }
  const GridShape grid{image.height / projector.patch_size(),
                       image.width / projector.patch_size()};
  return TokenGrid(std::move(tokens), grid, std::move(image_id));
}

}  // namespace tokenshot
