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
#include <vector>

#include "wavetrain/error.hpp"

namespace wavetrain {

/// Three-channel image of doubles stored row-major with interleaved
/// channels: element (y, x, c) lives at (y * width + x) * 3 + c.
/// The tag keeps RGB intensities, optical densities and stain
/// concentrations from being mixed up at compile time.
template <class Tag>
struct Image3 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  Image3() = default;
  Image3(std::size_t h, std::size_t w) : height(h), width(w), data(h * w * 3, 0.0) {}
  Image3(std::size_t h, std::size_t w, std::vector<double> values)
      : height(h), width(w), data(std::move(values)) {
    if (data.size() != height * width * 3)
      throw Error(ErrorCode::BadDimensions, "image data length does not match height*width*3");
  }

  std::size_t pixel_count() const noexcept { return height * width; }
  double& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * 3 + c]; }

  bool operator==(const Image3&) const = default;
};

struct RgbTag {};
struct OdTag {};
struct HedTag {};

/// Intensities in [0, 1].
using RgbImage = Image3<RgbTag>;
/// Per-channel optical density, -log10 of intensity.
using OdImage = Image3<OdTag>;
/// Hematoxylin, eosin and DAB concentrations in optical-density units.
using HedImage = Image3<HedTag>;

/// True when dimensions are consistent and every channel lies in [0, 1].
bool is_valid_rgb(const RgbImage& img) noexcept;

}  // namespace wavetrain
