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

#include "wavetrain/error.hpp"

namespace wavetrain {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownOp: return "UnknownOp";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptySources: return "EmptySources";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyEval: return "EmptyEval";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t position, std::string token, const std::string& what)
    : Error(code, what + " at position " + std::to_string(position) + " near '" + token + "'"),
      position_(position),
      token_(std::move(token)) {}

NonFiniteLoss::NonFiniteLoss(std::size_t iteration, std::size_t trajectory)
    : Error(ErrorCode::NonFiniteLoss, "non-finite loss at iteration " + std::to_string(iteration) +
                                          " in trajectory " + std::to_string(trajectory)),
      iteration_(iteration),
      trajectory_(trajectory) {}

}  // namespace wavetrain
