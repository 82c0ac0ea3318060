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

#include "tokenshot/errors.hpp"

#include <utility>

namespace tokenshot {

const char* ToString(FormatError::Reason reason) {
  switch (reason) {
    case FormatError::Reason::kBadMagic:
      return "BadMagic";
    case FormatError::Reason::kBadVersion:
      return "BadVersion";
    case FormatError::Reason::kBadFlags:
      return "BadFlags";
    case FormatError::Reason::kBadDims:
      return "BadDims";
    case FormatError::Reason::kTruncated:
      return "Truncated";
    case FormatError::Reason::kTrailingData:
      return "TrailingData";
  }
  return "Unknown";
}

FormatError::FormatError(Reason reason, std::string field, std::uint64_t offset,
                         const std::string& detail)
    : DataError(std::string(ToString(reason)) + " in field '" + field +
                "' at offset " + std::to_string(offset) + ": " + detail),
      reason_(reason),
      field_(std::move(field)),
      offset_(offset) {}

}  // namespace tokenshot
