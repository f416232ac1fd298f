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

#include <array>

#include "wavetrain/image.hpp"
#include "wavetrain/rng.hpp"

namespace wavetrain {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Floor applied to intensities before taking log10, so black maps to a
/// finite optical density of 6.
inline constexpr double kOdEpsilon = 1e-6;
/// Stain matrices with |det| at or below this are rejected as singular.
inline constexpr double kMinStainDeterminant = 1e-6;

double determinant(const Mat3& m) noexcept;

/// Adjugate inverse. Throws SingularMatrix when |det| <= kMinStainDeterminant.
Mat3 inverse(const Mat3& m);

/// Row-vector product v * m.
Vec3 mul_row(const Vec3& v, const Mat3& m) noexcept;

/// Three unit-norm stain optical-density vectors (hematoxylin, eosin, DAB),
/// one per row, together with the cached inverse used for deconvolution.
class StainMatrix {
 public:
  /// Normalizes each row to unit length. Throws SingularMatrix when a row is
  /// zero or the normalized matrix is not invertible.
  static StainMatrix from_rows(const Mat3& raw);

  const Mat3& rows() const noexcept { return rows_; }
  const Mat3& inverse() const noexcept { return inverse_; }
  double determinant() const noexcept;

  bool operator==(const StainMatrix& other) const noexcept { return rows_ == other.rows_; }

 private:
  StainMatrix(const Mat3& rows, const Mat3& inv) : rows_(rows), inverse_(inv) {}
  Mat3 rows_;
  Mat3 inverse_;
};

/// Ruifrok-Johnston H&E-DAB vectors, row-normalized:
/// H = (0.65, 0.70, 0.29), E = (0.07, 0.99, 0.11), DAB = (0.27, 0.57, 0.78).
const StainMatrix& default_stain_matrix();

/// Per-stain affine perturbation hed' = alpha * hed + beta.
struct JitterParams {
  Vec3 alpha{1.0, 1.0, 1.0};
  Vec3 beta{0.0, 0.0, 0.0};
};

// Pixel kernels.
Vec3 rgb_to_od_pixel(const Vec3& rgb) noexcept;
Vec3 od_to_rgb_pixel(const Vec3& od) noexcept;
Vec3 rgb_to_hed_pixel(const Vec3& rgb, const StainMatrix& m) noexcept;
Vec3 hed_to_rgb_pixel(const Vec3& hed, const StainMatrix& m) noexcept;

OdImage rgb_to_od(const RgbImage& img);
RgbImage od_to_rgb(const OdImage& od);
HedImage rgb_to_hed(const RgbImage& img, const StainMatrix& m = default_stain_matrix());
RgbImage hed_to_rgb(const HedImage& hed, const StainMatrix& m = default_stain_matrix());

/// Draws alpha_0, alpha_1, alpha_2 ~ U(1 - strength, 1 + strength) and then
/// beta_0, beta_1, beta_2 ~ U(-strength, strength): six uniform() draws.
JitterParams sample_jitter(double strength, Rng& rng);

/// Deconvolve, perturb every pixel's stains with the same params, reconvolve.
RgbImage apply_stain_jitter(const RgbImage& img, const JitterParams& params,
                            const StainMatrix& m = default_stain_matrix());

/// HEDJitter: one sample_jitter() per image, then apply_stain_jitter().
/// Throws InvalidArgument for negative strength.
RgbImage hed_jitter(const RgbImage& img, double strength, Rng& rng,
                    const StainMatrix& m = default_stain_matrix());

}  // namespace wavetrain
