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

#include "tokenshot/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tokenshot/errors.hpp"

namespace tokenshot {

std::vector<HeatmapImage> RenderImportance(std::span<const double> v,
                                           const Episode& episode, int scale) {
  if (v.size() != static_cast<std::size_t>(episode.num_support_tokens())) {
    throw InvalidArgumentError("importance weights have length " +
                               std::to_string(v.size()) + ", expected N*K*L = " +
                               std::to_string(episode.num_support_tokens()));
  }
  if (scale < 1) throw InvalidArgumentError("heatmap scale must be >= 1");

  const auto [lo_it, hi_it] = std::ranges::minmax_element(v);
  const double lo = *lo_it;
  const double hi = *hi_it;
  auto shade = [&](double x) -> std::uint8_t {
    if (!(hi > lo)) return 128;
    return static_cast<std::uint8_t>(std::lround(255.0 * (x - lo) / (hi - lo)));
  };

  const GridShape grid = episode.grid();
  const int L = grid.size();
  std::vector<HeatmapImage> out;
  for (int n = 0; n < episode.n_way(); ++n) {
    for (int k = 0; k < episode.k_shot(); ++k) {
      HeatmapImage h;
      h.class_index = n;
      h.shot = k;
      h.image.width = grid.width * scale;
      h.image.height = grid.height * scale;
      h.image.channels = 1;
      h.image.pixels.resize(static_cast<std::size_t>(h.image.width * h.image.height));
      const int base = (n * episode.k_shot() + k) * L;
      for (int y = 0; y < h.image.height; ++y) {
        for (int x = 0; x < h.image.width; ++x) {
          const int token = (y / scale) * grid.width + (x / scale);
          h.image.pixels[static_cast<std::size_t>(y * h.image.width + x)] =
              shade(v[static_cast<std::size_t>(base + token)]);
        }
      }
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::string HeatmapFilename(const std::string& episode, int class_index, int shot) {
  return episode + "_" + std::to_string(class_index) + "_" + std::to_string(shot) +
         ".pgm";
}

std::vector<std::filesystem::path> WriteHeatmaps(
    std::span<const HeatmapImage> heatmaps, const std::filesystem::path& dir,
    const std::string& episode) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const auto& h : heatmaps) {
    auto path = dir / HeatmapFilename(episode, h.class_index, h.shot);
    WritePnm(path, h.image);
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace tokenshot
