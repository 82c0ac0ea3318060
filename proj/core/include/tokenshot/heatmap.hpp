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

#ifndef TOKENSHOT_HEATMAP_HPP_
#define TOKENSHOT_HEATMAP_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tokenshot/pnm.hpp"
#include "tokenshot/token_model.hpp"

namespace tokenshot {

/// Grayscale importance map of one support image. Brighter = more important.
struct HeatmapImage {
  int class_index = 0;
  int shot = 0;
  PnmImage image;  // single channel
};

/// One heatmap per support image, class-major. Cell (r, c) of image (n, k)
/// is round(255 * (v_j - min v) / (max v - min v)) for its token j, where
/// min and max run over the whole episode; constant v gives 128 everywhere.
/// Each cell is drawn as a scale x scale block.
/// Throws InvalidArgumentError on a length mismatch or scale < 1.
std::vector<HeatmapImage> RenderImportance(std::span<const double> v,
                                           const Episode& episode, int scale = 1);

/// "{episode}_{class}_{shot}.pgm"
std::string HeatmapFilename(const std::string& episode, int class_index, int shot);

/// Writes every heatmap into `dir` (created if needed); returns the paths.
std::vector<std::filesystem::path> WriteHeatmaps(
    std::span<const HeatmapImage> heatmaps, const std::filesystem::path& dir,
    const std::string& episode);

}  // namespace tokenshot

#endif  // TOKENSHOT_HEATMAP_HPP_
