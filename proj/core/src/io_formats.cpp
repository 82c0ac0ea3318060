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

#include "tokenshot/io_formats.hpp"

#include <bit>
#include <charconv>
#include <limits>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "tokenshot/errors.hpp"
#include "tokenshot/pnm.hpp"

namespace tokenshot {
namespace {

using json = nlohmann::json;

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t x) {
  out.push_back(static_cast<std::uint8_t>(x & 0xff));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((x >> shift) & 0xff));
  }
}

std::uint16_t GetU16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t GetU32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::string ShortestDouble(double x) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

template <typename T>
T RequireField(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw DataError(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where + ": field '" + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> EncodeTokens(std::span<const TokenGrid> grids) {
  if (grids.empty()) {
    throw InvalidArgumentError("token files need at least one image");
  }
  const TokenGrid& first = grids.front();
  constexpr int kMax16 = std::numeric_limits<std::uint16_t>::max();
  if (first.num_tokens() > kMax16 || first.dim() > kMax16) {
    throw InvalidArgumentError("L and D must fit in 16 bits");
  }
  if (grids.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgumentError("too many images for one token file");
  }
  for (const auto& g : grids) {
    if (g.grid() != first.grid() || g.dim() != first.dim()) {
      throw InvalidArgumentError("grid '" + g.image_id() +
                                 "' does not match the first grid's shape");
    }
  }

  std::vector<std::uint8_t> out;
  out.reserve(kTokenHeaderSize + grids.size() * static_cast<std::size_t>(
                                                    first.num_tokens() * first.dim()) * 4);
  out.insert(out.end(), std::begin(kTokenMagic), std::end(kTokenMagic));
  PutU16(out, kTokenFileVersion);
  PutU16(out, 0);
  PutU32(out, static_cast<std::uint32_t>(grids.size()));
  PutU16(out, static_cast<std::uint16_t>(first.num_tokens()));
  PutU16(out, static_cast<std::uint16_t>(first.dim()));
  PutU16(out, static_cast<std::uint16_t>(first.grid().height));
  PutU16(out, static_cast<std::uint16_t>(first.grid().width));
  for (const auto& g : grids) {
    for (float x : g.tokens().data()) PutU32(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

TokenFileHeader DecodeTokenHeader(std::span<const std::uint8_t> bytes) {
  using Reason = FormatError::Reason;
  if (bytes.size() < kTokenHeaderSize) {
    throw FormatError(Reason::kTruncated, "header", bytes.size(),
                      "expected " + std::to_string(kTokenHeaderSize) +
                          " header bytes, found " + std::to_string(bytes.size()));
  }
  if (!std::equal(std::begin(kTokenMagic), std::end(kTokenMagic), bytes.begin())) {
    throw FormatError(Reason::kBadMagic, "magic", 0, "expected \"FTUR\"");
  }
  const std::uint16_t version = GetU16(bytes, 4);
  if (version != kTokenFileVersion) {
    throw FormatError(Reason::kBadVersion, "version", 4,
                      "unsupported version " + std::to_string(version));
  }
  const std::uint16_t flags = GetU16(bytes, 6);
  if (flags != 0) {
    throw FormatError(Reason::kBadFlags, "flags", 6,
                      "expected 0, found " + std::to_string(flags));
  }
  TokenFileHeader h;
  h.num_images = GetU32(bytes, 8);
  h.tokens_per_image = GetU16(bytes, 12);
  h.dim = GetU16(bytes, 14);
  h.grid_h = GetU16(bytes, 16);
  h.grid_w = GetU16(bytes, 18);
  if (h.num_images == 0) {
    throw FormatError(Reason::kBadDims, "num_images", 8, "must be >= 1");
  }
  if (h.tokens_per_image == 0) {
    throw FormatError(Reason::kBadDims, "L", 12, "must be >= 1");
  }
  if (h.dim == 0) throw FormatError(Reason::kBadDims, "D", 14, "must be >= 1");
  if (static_cast<std::uint32_t>(h.grid_h) * h.grid_w != h.tokens_per_image) {
    throw FormatError(Reason::kBadDims, "grid_h", 16,
                      "grid " + std::to_string(h.grid_h) + "x" +
                          std::to_string(h.grid_w) + " does not multiply to L = " +
                          std::to_string(h.tokens_per_image));
  }
  return h;
}

std::vector<TokenGrid> DecodeTokens(std::span<const std::uint8_t> bytes,
                                    const std::string& source) {
  using Reason = FormatError::Reason;
  const TokenFileHeader h = DecodeTokenHeader(bytes);
  const std::size_t per_image =
      static_cast<std::size_t>(h.tokens_per_image) * h.dim;
  const std::size_t expected = static_cast<std::size_t>(h.num_images) * per_image * 4;
  const std::size_t actual = bytes.size() - kTokenHeaderSize;
  if (actual < expected) {
    throw FormatError(Reason::kTruncated, "payload", kTokenHeaderSize,
                      "expected " + std::to_string(expected) + " payload bytes, found " +
                          std::to_string(actual));
  }
  if (actual > expected) {
    throw FormatError(Reason::kTrailingData, "payload", kTokenHeaderSize + expected,
                      std::to_string(actual - expected) +
                          " bytes after the declared payload");
  }

  std::vector<TokenGrid> grids;
  grids.reserve(h.num_images);
  std::size_t at = kTokenHeaderSize;
  const GridShape grid{h.grid_h, h.grid_w};
  for (std::uint32_t i = 0; i < h.num_images; ++i) {
    MatrixF tokens(h.tokens_per_image, h.dim);
    for (float& x : tokens.data()) {
      x = std::bit_cast<float>(GetU32(bytes, at));
      at += 4;
    }
    try {
      grids.emplace_back(std::move(tokens), grid, source + "#" + std::to_string(i));
    } catch (const InvalidArgumentError& e) {
      throw DataError(source + ": image " + std::to_string(i) + ": " + e.what());
    }
  }
  return grids;
}

void WriteTokens(std::span<const TokenGrid> grids, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeTokens(grids));
}

std::vector<TokenGrid> ReadTokens(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeTokens(bytes, path.filename().string());
  } catch (const FormatError& e) {
    throw FormatError(e.reason(), e.field(), e.offset(),
                      path.string() + ": " + e.what());
  }
}

DatasetManifest ParseManifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("manifest must be a JSON object");

  DatasetManifest m;
  m.tokens_per_image = RequireField<int>(j, "L", "manifest");
  m.dim = RequireField<int>(j, "D", "manifest");
  m.grid.height = RequireField<int>(j, "grid_h", "manifest");
  m.grid.width = RequireField<int>(j, "grid_w", "manifest");
  if (m.tokens_per_image < 1 || m.dim < 1 || m.grid.height < 1 ||
      m.grid.width < 1 || m.grid.size() != m.tokens_per_image) {
    throw DataError("manifest declares inconsistent dimensions");
  }
  if (!j.contains("classes") || !j["classes"].is_object()) {
    throw DataError("manifest: 'classes' must be an object");
  }
  for (const auto& [name, refs] : j["classes"].items()) {
    if (!refs.is_array()) {
      throw DataError("manifest: class '" + name + "' must list references");
    }
    auto& out = m.classes[name];
    for (const auto& ref : refs) {
      const std::string where = "manifest class '" + name + "'";
      if (!ref.is_object()) throw DataError(where + ": reference must be an object");
      out.push_back({RequireField<std::string>(ref, "file", where),
                     RequireField<int>(ref, "index", where)});
    }
  }
  return m;
}

std::string ManifestToJson(const DatasetManifest& manifest) {
  json j;
  j["L"] = manifest.tokens_per_image;
  j["D"] = manifest.dim;
  j["grid_h"] = manifest.grid.height;
  j["grid_w"] = manifest.grid.width;
  j["classes"] = json::object();
  for (const auto& [name, refs] : manifest.classes) {
    json list = json::array();
    for (const auto& r : refs) list.push_back({{"file", r.file}, {"index", r.index}});
    j["classes"][name] = std::move(list);
  }
  return j.dump(2) + "\n";
}

void WriteManifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string text = ManifestToJson(manifest);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

TokenDataset LoadDataset(const std::filesystem::path& manifest_path) {
  const auto raw = ReadFileBytes(manifest_path);
  const DatasetManifest m = ParseManifest(std::string(raw.begin(), raw.end()));
  const auto base = manifest_path.parent_path();

  std::map<std::string, std::vector<TokenGrid>> files;
  std::set<std::pair<std::string, int>> seen;
  std::vector<TokenClass> classes;

  for (const auto& [name, refs] : m.classes) {
    TokenClass cls{name, {}};
    for (const auto& ref : refs) {
      auto it = files.find(ref.file);
      if (it == files.end()) {
        const auto path = base / ref.file;
        if (!std::filesystem::exists(path)) {
          throw DataError("class '" + name + "': unresolved reference to missing file '" +
                          ref.file + "'");
        }
        auto grids = ReadTokens(path);
        const auto& g = grids.front();
        if (g.num_tokens() != m.tokens_per_image || g.dim() != m.dim ||
            g.grid() != m.grid) {
          throw DataError(
              "dimension mismatch in class '" + name + "', file '" + ref.file +
              "': file has L=" + std::to_string(g.num_tokens()) +
              " D=" + std::to_string(g.dim()) + " grid " +
              std::to_string(g.grid().height) + "x" + std::to_string(g.grid().width) +
              ", manifest declares L=" + std::to_string(m.tokens_per_image) +
              " D=" + std::to_string(m.dim) + " grid " +
              std::to_string(m.grid.height) + "x" + std::to_string(m.grid.width));
        }
        it = files.emplace(ref.file, std::move(grids)).first;
      }
      if (ref.index < 0 || ref.index >= static_cast<int>(it->second.size())) {
        throw DataError("class '" + name + "': unresolved reference to image " +
                        std::to_string(ref.index) + " of '" + ref.file + "' (" +
                        std::to_string(it->second.size()) + " images)");
      }
      if (!seen.emplace(ref.file, ref.index).second) {
        throw DataError("ambiguous label: '" + ref.file + "' image " +
                        std::to_string(ref.index) + " is referenced more than once");
      }
      const TokenGrid& src = it->second[static_cast<std::size_t>(ref.index)];
      cls.grids.emplace_back(src.tokens(), src.grid(),
                             ref.file + "#" + std::to_string(ref.index));
    }
    classes.push_back(std::move(cls));
  }
  return TokenDataset(std::move(classes));
}

std::string ReportToJson(const EvalReport& report) {
  const auto& c = report.config;
  json config = {
      {"n_way", c.n_way},
      {"k_shot", c.k_shot},
      {"n_query", c.n_query_per_class},
      {"episodes", c.episodes},
      {"seed", c.seed},
      {"steps", c.classifier.steps},
      {"lr", c.classifier.lr},
      {"mask_window", c.classifier.mask_window},
      {"similarity", "cosine"},
  };
  config["tau"] = c.classifier.tau ? json(*c.classifier.tau) : json(nullptr);
  json j = {
      {"config", std::move(config)},
      {"mean", report.mean},
      {"ci95", report.ci95},
      {"episodes", report.per_episode_accuracy.size()},
      {"per_episode", report.per_episode_accuracy},
      {"wall_ms_per_episode", report.wall_ms_per_episode},
  };
  return j.dump(2) + "\n";
}

void WriteReportJson(const EvalReport& report, const std::filesystem::path& path) {
  const std::string text = ReportToJson(report);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

std::string ReportToCsv(const EvalReport& report) {
  std::string out = "episode,accuracy\n";
  for (std::size_t i = 0; i < report.per_episode_accuracy.size(); ++i) {
    out += std::to_string(i) + "," + ShortestDouble(report.per_episode_accuracy[i]) + "\n";
  }
  return out;
}

void WriteReportCsv(const EvalReport& report, const std::filesystem::path& path) {
  const std::string text = ReportToCsv(report);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                 text.size()));
}

}  // namespace tokenshot
