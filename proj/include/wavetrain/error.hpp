// Copyright 2026 The wavetrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wavetrain {

enum class ErrorCode {
  InvalidArgument,
  SingularMatrix,
  DegenerateMatrix,
  ParseError,
  UnknownOp,
  MissingFile,
  BadDimensions,
  BadLabel,
  EmptyDataset,
  DimensionMismatch,
  NonFiniteLoss,
  EmptySources,
  LayoutMismatch,
  LengthMismatch,
  EmptyEval,
  IoError,
  UnsupportedFormat,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed augmentation text. `position` is a 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t position, std::string token, const std::string& what);
  std::size_t position() const noexcept { return position_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t position_;
  std::string token_;
};

class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t iteration, std::size_t trajectory);
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t trajectory() const noexcept { return trajectory_; }

 private:
  std::size_t iteration_;
  std::size_t trajectory_;
};

}  // namespace wavetrain
