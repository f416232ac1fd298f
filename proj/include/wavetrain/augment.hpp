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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavetrain/image.hpp"
#include "wavetrain/rng.hpp"

namespace wavetrain {

struct AugParam {
  std::string key;
  double value = 0.0;
  bool operator==(const AugParam&) const = default;
};

/// One registered op with every parameter filled in, in registry order.
struct AugOp {
  std::string name;
  std::vector<AugParam> params;

  double param(std::string_view key) const;
  bool operator==(const AugOp&) const = default;
};

/// An ordered augmentation pipeline. An empty op list is the identity.
/// Equality compares the ops only; `name` is a display label.
struct AugSpec {
  std::vector<AugOp> ops;
  std::string name;

  bool is_identity() const noexcept { return ops.empty(); }
  bool operator==(const AugSpec& other) const { return ops == other.ops; }
};

struct ParamInfo {
  std::string key;
  double default_value;
  double min_value;
  double max_value;
  bool integral;
};

struct OpInfo {
  std::string name;
  std::vector<ParamInfo> params;
  std::string description;
};

/// The registered op set, in a fixed order:
///   identity
///   flip                  Bernoulli(0.5) horizontal, then Bernoulli(0.5) vertical
///   rot90(k)              k = -1 draws uniform_index(4), otherwise fixed k
///   affine(deg,tx,ty,scale)  angle, tx, ty, scale factor drawn in that order
///   blur(sigma)           sigma ~ U(0, sigma), separable Gaussian, radius ceil(3 sigma)
///   colorjitter(b,c)      offset ~ U(-b, b), then factor ~ U(1 - c, 1 + c)
///   hed(theta)            HEDJitter, six draws (see sample_jitter)
///   randpick(k,m)         partial Fisher-Yates over the five-op pool, then the
///                         chosen ops in order with magnitudes scaled by m/10
const std::vector<OpInfo>& registered_ops();

/// Parses `pipeline := op (";" op)* | ""`,
/// `op := name | name "(" arg ("," arg)* ")"`, `arg := key "=" number | number`.
/// A bare number binds to the op's first parameter, so "hed(0.05)" means
/// hed(theta=0.05). Whitespace is ignored. Throws ParseError (with position
/// and token) on malformed text and UnknownOp for unregistered names.
AugSpec parse_aug_spec(std::string_view text);

/// Canonical text form: every parameter printed as key=value using the
/// shortest round-tripping decimal. parse_aug_spec(to_string(s)) == s.
std::string to_string(const AugSpec& spec);

/// Applies the ops in order. Identity returns a copy.
RgbImage apply(const AugSpec& spec, const RgbImage& img, Rng& rng);

// Deterministic building blocks, exposed for tests and replay.
RgbImage flip(const RgbImage& img, bool horizontal, bool vertical);
/// Counter-clockwise rotation by k quarter turns. Non-square images swap
/// height and width for odd k.
RgbImage rot90(const RgbImage& img, int k);
/// Rotation (degrees) and isotropic scale about the image center followed by
/// a translation in pixels. Bilinear sampling, clamp-to-edge borders.
RgbImage affine_warp(const RgbImage& img, double angle_deg, double tx, double ty, double scale);
/// Normalized 1-D taps of length 2r+1, r = ceil(3 sigma). sigma <= 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);
/// Separable blur with clamp-to-edge borders.
RgbImage gaussian_blur(const RgbImage& img, double sigma);
/// v' = clamp(factor * (v - 0.5) + 0.5 + offset, 0, 1).
RgbImage color_jitter(const RgbImage& img, double offset, double factor);

}  // namespace wavetrain
