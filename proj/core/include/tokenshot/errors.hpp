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

#ifndef TOKENSHOT_ERRORS_HPP_
#define TOKENSHOT_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tokenshot {

/// Broad error category. The CLI maps these onto its exit codes.
enum class ErrorKind {
  kInvalidArgument,  // caller passed something malformed (exit 1)
  kData,             // input files or datasets are unusable (exit 2)
  kNumerical,        // non-finite loss or degenerate episode (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

/// Token file decoding failure. `field` names the offending header field
/// (or "payload") and `offset` is its byte offset within the file.
class FormatError : public DataError {
 public:
  enum class Reason {
    kBadMagic,
    kBadVersion,
    kBadFlags,
    kBadDims,
    kTruncated,
    kTrailingData,
  };

  FormatError(Reason reason, std::string field, std::uint64_t offset,
              const std::string& detail);

  Reason reason() const noexcept { return reason_; }
  const std::string& field() const noexcept { return field_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  Reason reason_;
  std::string field_;
  std::uint64_t offset_;
};

const char* ToString(FormatError::Reason reason);

}  // namespace tokenshot

#endif  // TOKENSHOT_ERRORS_HPP_
