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

// A deterministic stand-in for a pretrained vision backbone.
//
// Images are cut into non-overlapping P x P patches and every flattened patch
// is multiplied by a fixed random projection. There is no nonlinearity, no
// attention and no positional encoding: the encoder only exists so that the
// classifier can be exercised end to end on real image files.

#ifndef TOKENSHOT_TOY_ENCODER_HPP_
#define TOKENSHOT_TOY_ENCODER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tokenshot/pnm.hpp"
#include "tokenshot/token_model.hpp"

namespace tokenshot {

/// H x W x C image with values in [0, 1], row-major and channel-last.
struct RawImage {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<float> pixels;

  /// Byte values divided by 255.
  static RawImage FromPnm(const PnmImage& image);
};

class PatchProjector {
 public:
  /// Draws a (P*P*C) x D projection with entries i.i.d. uniform in
  /// [-1/sqrt(P*P*C), 1/sqrt(P*P*C)) from Rng(seed), row-major.
  PatchProjector(int patch_size, int channels, int out_dim, std::uint64_t seed);

  /// Uses an explicit projection; rows must equal patch_size^2 * channels.
  PatchProjector(int patch_size, int channels, MatrixD projection);

  int patch_size() const { return patch_size_; }
  int channels() const { return channels_; }
  int out_dim() const { return static_cast<int>(projection_.cols()); }
  const MatrixD& projection() const { return projection_; }

 private:
  int patch_size_;
  int channels_;
  MatrixD projection_;
};

/// Splits `image` into (H/P)*(W/P) patches in row-major grid order. Each
/// patch is flattened row-major, channel-last, to P*P*C values.
/// Throws InvalidArgumentError if H or W is not divisible by P.
std::vector<std::vector<float>> ExtractPatches(const RawImage& image,
                                               int patch_size);

TokenGrid Encode(const RawImage& image, const PatchProjector& projector,
                 std::string image_id = {});

}  // namespace tokenshot

#endif  // TOKENSHOT_TOY_ENCODER_HPP_
