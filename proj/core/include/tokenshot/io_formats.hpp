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

// On-disk formats.
//
// Token file (".ftur"), all integers little-endian:
//
//   offset  size  field
//   0       4     magic "FTUR"
//   4       2     version (u16) = 1
//   6       2     flags (u16) = 0
//   8       4     num_images (u32) >= 1
//   12      2     L, tokens per image (u16) = grid_h * grid_w
//   14      2     D, token dimension (u16) >= 1
//   16      2     grid_h (u16)
//   18      2     grid_w (u16)
//   20      ...   num_images * L * D IEEE-754 binary32 values, little-endian,
//                 image-major, then token, then dimension
//
// Dataset manifest (JSON); file paths are relative to the manifest:
//
//   { "L": 16, "D": 8, "grid_h": 4, "grid_w": 4,
//     "classes": { "cat": [ {"file": "cat.ftur", "index": 0}, ... ], ... } }
//
// Evaluation report (JSON):
//
//   { "config": {...}, "mean": f, "ci95": f, "episodes": n,
//     "per_episode": [f, ...], "wall_ms_per_episode": f }

#ifndef TOKENSHOT_IO_FORMATS_HPP_
#define TOKENSHOT_IO_FORMATS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tokenshot/episodic_eval.hpp"
#include "tokenshot/token_model.hpp"

namespace tokenshot {

inline constexpr char kTokenMagic[4] = {'F', 'T', 'U', 'R'};
inline constexpr std::uint16_t kTokenFileVersion = 1;
inline constexpr std::size_t kTokenHeaderSize = 20;

struct TokenFileHeader {
  std::uint32_t num_images = 0;
  std::uint16_t tokens_per_image = 0;
  std::uint16_t dim = 0;
  std::uint16_t grid_h = 0;
  std::uint16_t grid_w = 0;

  friend bool operator==(const TokenFileHeader&, const TokenFileHeader&) = default;
};

/// Throws InvalidArgumentError for an empty list, grids with differing
/// shapes, or dimensions that do not fit the header fields.
std::vector<std::uint8_t> EncodeTokens(std::span<const TokenGrid> grids);

/// Throws FormatError naming the offending field and byte offset.
TokenFileHeader DecodeTokenHeader(std::span<const std::uint8_t> bytes);

/// Image ids are "<source>#<index>".
std::vector<TokenGrid> DecodeTokens(std::span<const std::uint8_t> bytes,
                                    const std::string& source = "tokens");

void WriteTokens(std::span<const TokenGrid> grids,
                 const std::filesystem::path& path);
std::vector<TokenGrid> ReadTokens(const std::filesystem::path& path);

struct ManifestRef {
  std::string file;
  int index = 0;
};

struct DatasetManifest {
  int tokens_per_image = 0;
  int dim = 0;
  GridShape grid;
  std::map<std::string, std::vector<ManifestRef>> classes;
};

/// Throws DataError on malformed JSON or missing fields.
DatasetManifest ParseManifest(const std::string& json_text);
std::string ManifestToJson(const DatasetManifest& manifest);
void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

/// Loads every referenced grid (classes ordered by name). Throws DataError
/// for unresolved references, dimension mismatches (naming class and file)
/// and (file, index) pairs referenced more than once.
TokenDataset LoadDataset(const std::filesystem::path& manifest_path);

std::string ReportToJson(const EvalReport& report);
void WriteReportJson(const EvalReport& report, const std::filesystem::path& path);

/// "episode,accuracy" rows, one per episode.
std::string ReportToCsv(const EvalReport& report);
void WriteReportCsv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace tokenshot

#endif  // TOKENSHOT_IO_FORMATS_HPP_
