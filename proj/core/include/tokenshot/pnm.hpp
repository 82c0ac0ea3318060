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

// Binary netpbm images: P5 (grayscale) and P6 (RGB), maxval 255 only.

#ifndef TOKENSHOT_PNM_HPP_
#define TOKENSHOT_PNM_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tokenshot {

struct PnmImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 for P5, 3 for P6
  std::vector<std::uint8_t> pixels;  // row-major, channel-last

  friend bool operator==(const PnmImage&, const PnmImage&) = default;
};

/// Throws DataError on malformed headers, maxval != 255 or short payloads.
PnmImage DecodePnm(std::span<const std::uint8_t> bytes);
PnmImage ReadPnm(const std::filesystem::path& path);

std::vector<std::uint8_t> EncodePnm(const PnmImage& image);
void WritePnm(const std::filesystem::path& path, const PnmImage& image);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace tokenshot

#endif  // TOKENSHOT_PNM_HPP_
