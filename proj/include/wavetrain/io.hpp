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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "wavetrain/image.hpp"
#include "wavetrain/metrics.hpp"
#include "wavetrain/model.hpp"

namespace wavetrain {

// ---- PPM ----------------------------------------------------------------

/// Binary P6 with maxval 255. Values are quantized as round(v * 255)
/// clamped to [0, 255]. Throws IoError.
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

/// Reads P6 / maxval 255 (header comments allowed) and scales by 1/255.
/// Throws UnsupportedFormat for any other magic or maxval, IoError otherwise.
RgbImage read_ppm(const std::filesystem::path& path);

// ---- Checkpoints --------------------------------------------------------

inline constexpr int kCheckpointFormatVersion = 1;

struct Manifest {
  int format_version = kCheckpointFormatVersion;
  Architecture arch;
  std::string dtype = "f64";
  std::uint64_t created_from_seed = 0;
  std::string layout_hash;
};

/// FNV-1a 64 over a canonical description of the flat layout, as 16 hex digits.
std::string layout_hash(const Architecture& arch);

/// Writes `<dir>/manifest.json` and `<dir>/weights.bin` (little-endian f64
/// in layout order), creating dir as needed. Throws IoError with the path.
void write_checkpoint(const WeightVector& w, const std::filesystem::path& dir, std::uint64_t created_from_seed = 0);

/// Inverse of write_checkpoint, bit-exact. Throws IoError, LayoutMismatch
/// (manifest inconsistent with its architecture) or LengthMismatch
/// (weights.bin size differs from the manifest's parameter count).
WeightVector read_checkpoint(const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

// ---- Metrics CSV --------------------------------------------------------

inline constexpr const char* kMetricsHeader = "iteration,split,domain_id,loss,accuracy";

/// Formats one row: loss and accuracy with 6 decimals, pooled domain as "pooled".
std::string format_metrics_row(const MetricsRecord& r);

/// Appends rows, writing the header first if the file is absent or empty.
/// An empty record list still creates a header-only file. Throws IoError.
void append_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path);

/// Writes the whole file (truncating). Used for self-contained tables.
void write_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path);

// ---- Misc ---------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace wavetrain
