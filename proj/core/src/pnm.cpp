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

#include "tokenshot/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "tokenshot/errors.hpp"

namespace tokenshot {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then parses a decimal integer.
  int NextInt() {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw DataError("PNM header: expected integer at byte " +
                      std::to_string(pos_));
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1 << 20) throw DataError("PNM header: value too large");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void ConsumeSingleSpace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DataError("PNM header: missing whitespace before raster");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

PnmImage DecodePnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("not a binary PGM/PPM file (expected P5 or P6 magic)");
  }
  PnmImage image;
  image.channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader reader(bytes);
  image.width = reader.NextInt();
  image.height = reader.NextInt();
  const int maxval = reader.NextInt();
  if (maxval != 255) {
    throw DataError("unsupported PNM maxval " + std::to_string(maxval) +
                    " (only 255 is accepted)");
  }
  if (image.width < 1 || image.height < 1) {
    throw DataError("PNM image has zero width or height");
  }
  reader.ConsumeSingleSpace();

  const std::size_t expected = static_cast<std::size_t>(image.width) *
                               static_cast<std::size_t>(image.height) *
                               static_cast<std::size_t>(image.channels);
  const std::size_t available = bytes.size() - reader.pos();
  if (available < expected) {
    throw DataError("PNM raster truncated: expected " + std::to_string(expected) +
                    " bytes, found " + std::to_string(available));
  }
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos()),
                      bytes.begin() +
                          static_cast<std::ptrdiff_t>(reader.pos() + expected));
  return image;
}

PnmImage ReadPnm(const std::filesystem::path& path) {
  try {
    return DecodePnm(ReadFileBytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodePnm(const PnmImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidArgumentError("PNM images have 1 or 3 channels");
  }
  const std::size_t expected = static_cast<std::size_t>(image.width) *
                               static_cast<std::size_t>(image.height) *
                               static_cast<std::size_t>(image.channels);
  if (image.pixels.size() != expected) {
    throw InvalidArgumentError("PNM pixel buffer size does not match dimensions");
  }
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") +
                             "\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void WritePnm(const std::filesystem::path& path, const PnmImage& image) {
  WriteFileBytes(path, EncodePnm(image));
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace tokenshot
